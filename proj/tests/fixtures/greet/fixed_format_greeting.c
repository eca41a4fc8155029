int format_greeting(char *out, const char *name)
{
  char tmp[16];
  int i = 0;
  while (name[i] && i < 15) {
    tmp[i] = name[i];
    i++;
  }
  tmp[i] = 0;
  capitalize(tmp);
  const char *prefix = "Hello, ";
  int n = 0;
  while (prefix[n]) {
    out[n] = prefix[n];
    n++;
  }
  for (int j = 0; tmp[j]; j++)
    out[n++] = tmp[j];
  out[n++] = '!';
  out[n] = 0;
  return n;
}
