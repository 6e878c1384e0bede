#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssreg/dataset.hpp"
#include "ssreg/estimators.hpp"
#include "ssreg/suffstats.hpp"

namespace ssreg {

struct AccumulateResult {
    std::int64_t rows = 0;
    std::int64_t batches = 0;
    std::uint64_t passes = 0;  // file opens performed by this call
    std::vector<std::string> feature_names;
    std::size_t p = 0;
};

/// One streaming pass over each path, every shard into its own accumulator,
/// combined with merge. With parallel set, shards run on their own threads.
LinRegSS accumulate_linear(const std::vector<std::string>& paths, const DatasetSchema& schema,
                           std::size_t batch_size, AccumulateResult* info = nullptr,
                           bool parallel = false);

WeightedSS accumulate_weighted(const std::vector<std::string>& paths, const DatasetSchema& schema,
                               std::size_t batch_size, AccumulateResult* info = nullptr,
                               bool parallel = false);

BoxCoxSS accumulate_boxcox(const std::vector<std::string>& paths, const DatasetSchema& schema,
                           const RealVector& grid, std::size_t batch_size,
                           AccumulateResult* info = nullptr, bool parallel = false);

/// Streams the model's feature columns from a data file and appends one
/// prediction per row to out.
void predict_file(const struct ModelArtifact& model, const std::string& data_path,
                  std::size_t batch_size, bool inverse_transform, RealVector& out);

}  // namespace ssreg
