// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Optional argv[1] is the CLI binary path used by the
// determinism criterion.

#include <cstdio>

int main(int, char**) {
  std::printf("acceptance placeholder\n");
  return 1;
}
