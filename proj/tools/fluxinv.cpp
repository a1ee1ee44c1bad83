#include <cstdio>

int main() {
  std::puts("fluxinv: subcommands not wired yet");
  return 1;
}
