#include "amlab/parallel.hpp"

namespace amlab {

namespace {
std::atomic<int> g_workers{1};
}

void set_workers(int n) { g_workers = std::max(1, n); }
int workers() { return g_workers.load(); }

std::uint64_t task_seed(std::uint64_t base, std::uint64_t i) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace amlab
