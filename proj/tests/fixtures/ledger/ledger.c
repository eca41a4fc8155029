/* Batch arithmetic toy: each line is "<op> n1 n2 ...". */

#include "../rt/rt.h"

struct batch {
  int vals[8];
  int *total;
  int count;
};

static int grand_total;

int parse_int(const char **cursor, int *out)
{
  const char *s = *cursor;
  while (*s == ' ')
    s++;
  if (!(*s == '-' || (*s >= '0' && *s <= '9')))
    return 0;
  *out = rt_atoi(s);
  while (*s && *s != ' ')
    s++;
  *cursor = s;
  return 1;
}

/* Seeded defect: accepts nine values into an eight-slot array. */
int load_batch(struct batch *b, const char *text)
{
  int v;
  b->count = 0;
  while (b->count <= 8 && parse_int(&text, &v)) {
    b->vals[b->count] = v;
    b->count++;
  }
  return b->count;
}

int batch_sum(const struct batch *b)
{
  int s = 0;
  for (int i = 0; i < b->count && i < 8; i++)
    s += b->vals[i];
  return s;
}

int batch_max(const struct batch *b)
{
  int m = b->vals[0];
  for (int i = 1; i < b->count && i < 8; i++) {
    if (b->vals[i] > m)
      m = b->vals[i];
  }
  return m;
}

void print_signed(int v)
{
  if (v < 0) {
    rt_puts("-");
    v = -v;
  }
  rt_putu((unsigned int)v);
  rt_puts("\n");
}

int main(void)
{
  static char line[256];
  struct batch b;
  while (rt_read_line(line, sizeof line) > 0) {
    b.total = &grand_total;
    const char *rest = line + 3;
    if (line[0] == 's' && line[1] == 'u' && line[2] == 'm') {
      load_batch(&b, rest);
      int s = batch_sum(&b);
      *b.total += s;
      print_signed(s);
    } else if (line[0] == 'm' && line[1] == 'a' && line[2] == 'x') {
      load_batch(&b, rest);
      print_signed(batch_max(&b));
    } else if (line[0] == 't' && line[1] == 'o' && line[2] == 't') {
      print_signed(grand_total);
    }
  }
  return 0;
}
