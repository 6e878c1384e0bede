#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ssreg/estimators.hpp"
#include "ssreg/suffstats.hpp"

namespace ssreg {

inline constexpr int kSsSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;

/// Sufficient-statistics artifact files are JSON with full-precision numbers;
/// read(write(ss)) reproduces every field exactly. Symmetric matrices are
/// stored as their packed row-major upper triangle.

void write_ss(const LinRegSS& ss, const std::string& path);
void write_ss(const WeightedSS& ss, const std::string& path);
void write_ss(const BoxCoxSS& ss, const std::string& path);

using AnySS = std::variant<LinRegSS, WeightedSS, BoxCoxSS>;

AnySS read_ss(const std::string& path);

LinRegSS read_linear_ss(const std::string& path);
WeightedSS read_weighted_ss(const std::string& path);
BoxCoxSS read_boxcox_ss(const std::string& path);

void write_any_ss(const AnySS& ss, const std::string& path);

/// Fitted-model artifact: the fit plus the input schema it was trained
/// against, so prediction can validate its inputs.
struct ModelArtifact {
    FitResult fit;
    std::vector<std::string> column_names;  // feature columns, X order
    bool intercept = false;
};

void write_model(const ModelArtifact& model, const std::string& path);
ModelArtifact read_model(const std::string& path);

}  // namespace ssreg
