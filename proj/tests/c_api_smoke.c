/* Compiles the C surface as C and squares 7 through it. */
#include <stdio.h>
#include <string.h>

#include "weldmill/c_api.h"

int main(void) {
  unsigned char seven[8] = {7, 0, 0, 0, 0, 0, 0, 0};
  weldmill_handle x = weldmill_new_data_object(seven, sizeof seven, "i64");
  weldmill_handle sq = weldmill_new_computed_object(&x, 1, "v0 * v0", NULL);
  weldmill_handle r = weldmill_evaluate(sq, NULL);
  uint64_t size = 0;
  const uint8_t* out = weldmill_result_data(r, &size);
  if (!out || size != 8 || out[0] != 49 || memcmp(out + 1, "\0\0\0\0\0\0\0", 7) != 0) {
    fprintf(stderr, "unexpected result: %s\n", weldmill_last_error() ? weldmill_last_error() : "wrong bytes");
    return 1;
  }
  if (weldmill_free_result(r) || weldmill_free_object(sq) || weldmill_free_object(x)) return 1;
  printf("49\n");
  return 0;
}
