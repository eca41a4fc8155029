/* unbound symbol: fx_copy_n */
__asm__(
    ".pushsection .text\n"
    ".globl fx_copy_n\n"
    ".hidden fx_copy_n\n"
    ".type fx_copy_n, @function\n"
    "fx_copy_n:\n"
    "\tcall 1f\n"
    "1:\tpopl %eax\n"
    "\tmovl prd_saved_ebx-1b(%eax), %ebx\n"
    "\t.byte 0xb8\n"
    ".globl prd_plt_imm_fx_copy_n\n"
    ".hidden prd_plt_imm_fx_copy_n\n"
    "prd_plt_imm_fx_copy_n:\n"
    "\t.long 0xe50ed7e4\n"
    "\tjmp *%eax\n"
    ".size fx_copy_n, .-fx_copy_n\n"
    ".popsection\n");
