// Reconstructs the golden mean process from a simulated stream and prints
// its measures next to the analytic values.

#include <cstdio>

#include "botdyn/botdyn.hpp"

int main() {
  using namespace botdyn;
  const auto symbols = generate_symbols(golden_mean(0.5, /*seed=*/42), 100000);
  const auto machine = reconstruct(symbols, /*L=*/3);

  std::printf("states: %zu\n", machine.num_states());
  for (const auto& s : machine.states) {
    std::printf("  state %d  P(0)=%.3f P(1)=%.3f  histories:", s.id, s.next_dist[0], s.next_dist[1]);
    for (const auto& h : s.histories) std::printf(" '%s'", history_string(h).c_str());
    std::printf("\n");
  }
  std::printf("C = %.4f bits (analytic 0.9183)\n", statistical_complexity(machine));
  std::printf("h = %.4f bits (analytic 0.6667)\n", entropy_rate(machine));
  std::printf("E = %.4f bits (analytic at L=3: 0.2516)\n", predictable_information(symbols, machine, 3));
}
