#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssreg/linalg.hpp"
#include "ssreg/suffstats.hpp"

namespace ssreg {

/// Names the response/weight/feature columns of an input file. An empty
/// feature list means "every column that is not the response or the weight,
/// in file order". With intercept set, a constant-1 leading column is
/// injected into X at stream time.
struct DatasetSchema {
    std::string response;                // may be empty for prediction streams
    std::string weight;                  // empty = unweighted
    std::vector<std::string> features;   // empty = all remaining columns
    bool intercept = false;

    void validate() const;
};

/// One mini-batch of rows. X is row-major rows x p where p counts the
/// injected intercept column, if any.
struct DataBatch {
    std::size_t rows = 0;
    std::size_t p = 0;
    std::vector<double> X;
    RealVector y;   // empty when the schema has no response
    RealVector w;   // empty when the schema has no weight column
};

namespace io {
/// Number of file passes started in this process. One stream open = one pass.
std::uint64_t pass_count();
void reset_pass_count();
}  // namespace io

/// Streams a CSV (header required, '#' metadata lines skipped) or an SSRG
/// binary file in mini-batches with O(batch_size * p) memory. The format is
/// detected from the file's leading magic bytes. Exactly one pass per stream.
class BatchStream {
  public:
    BatchStream(const std::string& path, DatasetSchema schema,
                std::size_t batch_size = kDefaultBatchSize);
    ~BatchStream();

    BatchStream(BatchStream&&) noexcept;
    BatchStream& operator=(BatchStream&&) noexcept;

    /// Fills the next batch, reusing out's buffers. Returns false at EOF.
    bool next(DataBatch& out);

    /// Width of X including the intercept column.
    std::size_t p() const;

    /// Resolved feature names in X order (without the intercept).
    const std::vector<std::string>& feature_names() const;

    bool has_weight() const;
    std::int64_t rows_read() const;
    std::int64_t batches_read() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Binary dataset layout: "SSRG" magic, u32 version, u64 row count, u32 column
/// count, then row-major little-endian doubles. The last column is the
/// response, the preceding ones are features named x1..x{k}.
inline constexpr char kBinaryMagic[4] = {'S', 'S', 'R', 'G'};
inline constexpr std::uint32_t kBinaryVersion = 1;

}  // namespace ssreg
