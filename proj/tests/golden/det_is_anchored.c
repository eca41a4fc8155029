__asm__(
    ".pushsection .text\n"
    "prd_fix_det_is_anchored:\n"
    "\taddl $4, %esp\n"
    "\tret\n"
    ".popsection\n");

int det_is_anchored(void *prd_ebx, void *myfirst_significant_code, const unsigned char *code, int *options, unsigned int bracket_map, unsigned int backref_map)
{
  int prd_ret;

  prd_saved_ebx = prd_ebx;
  first_significant_code = (void *(*)())myfirst_significant_code;
  prd_ret = is_anchored(code, options, bracket_map, backref_map);
  /* stack correction: 8 bytes */
  __asm__ __volatile__(
      "movl 4(%%ebp), %%edx\n\t"
      "movl %%edx, 12(%%ebp)\n\t"
      "call 1f\n"
      "1:\tpopl %%edx\n\t"
      "leal prd_fix_det_is_anchored-1b(%%edx), %%edx\n\t"
      "movl %%edx, 4(%%ebp)"
      ::: "edx", "memory");
  return prd_ret;
}
