#include "pois/experiment.hpp"

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  try {
    const pois::ExperimentConfig cfg = pois::parse_args(argc, argv);
    if (cfg.help) {
      std::cout << cfg.help_text;
      return 0;
    }
    const pois::ExperimentResult result = pois::run_experiment(cfg);
    for (const auto& path : result.seed_files)
      std::cout << path.string() << "\n";
    std::cout << result.aggregate_file.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
