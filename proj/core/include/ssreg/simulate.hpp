#pragma once

#include <cstdint>
#include <string>

#include "ssreg/linalg.hpp"

namespace ssreg {

/// xoshiro256++ seeded through splitmix64, with Box-Muller normals. The
/// algorithm is pinned so datasets regenerate identically from (algorithm id,
/// seed) alone.
inline constexpr const char* kRngAlgorithmId = "xoshiro256++/box-muller";

class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (pairs cached).
    double normal();

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class DatasetFormat { csv, binary };

/// y = beta0 + sum_j beta[j] * x_j + sigma * z with features i.i.d. uniform on
/// [-1, 1] and z standard normal. With positive_y set, the response is
/// rescaled to exp(y / max(1, ||beta||_1)) so Box-Cox applies. The file
/// carries columns x1..x{features}, y.
struct SimulateConfig {
    std::int64_t n = 0;
    std::size_t features = 0;
    RealVector beta;  // length features + 1; beta[0] is the intercept
    double sigma = 0.0;
    std::uint64_t seed = 0;
    bool positive_y = false;
    DatasetFormat format = DatasetFormat::csv;
};

/// Writes a synthetic dataset. Deterministic: the same config yields a
/// byte-identical file.
void generate_synthetic(const SimulateConfig& config, const std::string& path);

}  // namespace ssreg
