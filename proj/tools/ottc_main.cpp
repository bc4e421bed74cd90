// tools/ottc_main.cpp  (placeholder; full CLI wired up below)
#include <cstdio>

int main() {
  std::puts("ottc: not yet wired");
  return 2;
}
