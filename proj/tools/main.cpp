#include <cstdio>

int main() {
  // placeholder until the harness lands
  std::puts("calderon: experiments not wired yet");
  return 1;
}
