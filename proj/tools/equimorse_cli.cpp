#include <cstdio>

#include "equimorse/equimorse.h"

int main(int argc, char** argv) {
  char *out = nullptr, *err = nullptr;
  const int code = em_run_command(argc - 1, argv + 1, &out, &err);
  if (out) std::fputs(out, stdout);
  if (err) std::fputs(err, stderr);
  em_string_free(out);
  em_string_free(err);
  return code;
}
