/*
 * Copyright (C) 2026 The prd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Payload with pointer tables, so the linked object carries R_386_RELATIVE
   relocations. */

static const char *const names[] = {"zero", "one", "two"};
static int (*const ops[])(int) = {0, 0};
static int twice(int x) { return 2 * x; }
static int (*hook)(int) = twice;

const char *det_pick(void *ebx, int i)
{
  (void)ebx;
  (void)ops;
  return names[hook(i) % 3];
}
