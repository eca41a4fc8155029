/* Label printer toy linked against libfx: "label TEXT" and "tag TEXT". */

#include "../rt/rt.h"
#include "fx.h"

int same_prefix(const char *s, const char *p)
{
  for (; *p; p++, s++) {
    if (*s != *p)
      return 0;
  }
  return 1;
}

/* Seeded defect: unbounded copy into a 16-byte buffer. */
int render_label(char *out, const char *text)
{
  char buf[16];
  fx_copy(buf, text);
  int n = fx_upper(buf);
  out[0] = '[';
  int len = fx_copy(out + 1, buf);
  out[len + 1] = ']';
  out[len + 2] = 0;
  return n;
}

int render_tag(char *out, const char *text)
{
  char buf[8];
  int len = fx_copy_n(buf, text, 7);
  out[0] = '<';
  fx_copy(out + 1, buf);
  out[len + 1] = '>';
  out[len + 2] = 0;
  return len;
}

int main(void)
{
  static char line[512];
  char out[64];
  int upper = 0;
  while (rt_read_line(line, sizeof line) > 0) {
    if (same_prefix(line, "label ")) {
      upper += render_label(out, line + 6);
      rt_puts(out);
    } else if (same_prefix(line, "tag ")) {
      render_tag(out, line + 4);
      rt_puts(out);
    } else {
      rt_puts("-");
    }
    rt_puts("\n");
  }
  rt_puts("upper: ");
  rt_putu((unsigned int)upper);
  rt_puts("\n");
  return 0;
}
