/* Tiny shared string library for the labels fixture. */

#include "fx.h"

int fx_copy(char *dst, const char *src)
{
  int n = 0;
  while ((dst[n] = src[n]))
    n++;
  return n;
}

int fx_copy_n(char *dst, const char *src, int cap)
{
  int n = 0;
  while (n < cap && src[n]) {
    dst[n] = src[n];
    n++;
  }
  dst[n] = 0;
  return n;
}

int fx_upper(char *s)
{
  int n = 0;
  for (; *s; s++) {
    if (*s >= 'a' && *s <= 'z') {
      *s = (char)(*s - 32);
      n++;
    }
  }
  return n;
}
