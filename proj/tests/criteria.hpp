#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace criteria {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct GradientReport {
  std::size_t parameters = 0;
  double max_rel_error = 0.0;
  bool straight_through_exact = false;
};

/// Analytic gradients of a miniature model against central differences of an
/// independently coded surrogate loss.
GradientReport gradient_check(std::uint64_t seed);

Outcome published_totals_arithmetic();
Outcome gradient_oracle();
Outcome rasterizer_oracle(int polygons = 100);
Outcome clustering_oracle();

struct EndToEnd {
  Outcome convergence;   // criterion 5
  Outcome determinism;   // criterion 6
  Outcome codebook_use;  // criterion 7
  Outcome blur;          // averaged decodes vs sampled reconstructions
  Outcome toy_square;    // reconstruction of a plain square footprint
};

/// Shannon entropy (bits) of a 32-bin intensity histogram.
double intensity_entropy(const std::vector<double>& pixels);

/// Generates the synthetic bundle under `work`, runs `forge all` twice with
/// the CLI at `forge_exe`, and checks the run.
EndToEnd end_to_end(const std::filesystem::path& forge_exe, const std::filesystem::path& work, int epochs);

}  // namespace criteria
