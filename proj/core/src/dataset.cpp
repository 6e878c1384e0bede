#include "ssreg/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

namespace ssreg {

namespace {

std::atomic<std::uint64_t> g_passes{0};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

double parse_cell(const char* begin, const char* end, std::int64_t row, std::size_t col) {
    double value = 0.0;
    // Tolerate surrounding spaces.
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                         ": unparseable numeric cell '" + std::string(begin, end) + "'");
    }
    return value;
}

}  // namespace

namespace io {
std::uint64_t pass_count() { return g_passes.load(std::memory_order_relaxed); }
void reset_pass_count() { g_passes.store(0, std::memory_order_relaxed); }
}  // namespace io

void DatasetSchema::validate() const {
    for (const std::string& f : features) {
        if (!response.empty() && f == response) {
            throw SchemaError("response column '" + response + "' also listed as a feature");
        }
        if (!weight.empty() && f == weight) {
            throw SchemaError("weight column '" + weight + "' also listed as a feature");
        }
    }
    if (!weight.empty() && weight == response) {
        throw SchemaError("weight column equals the response column");
    }
}

struct BatchStream::Impl {
    DatasetSchema schema;
    std::size_t batch_size = kDefaultBatchSize;
    std::ifstream file;
    bool binary = false;
    std::int64_t rows_read = 0;
    std::int64_t batches_read = 0;

    // Resolved layout.
    std::vector<std::string> feature_names;
    std::size_t p = 0;             // X width including intercept
    std::size_t file_columns = 0;  // columns per file row

    // CSV: source column index per feature slot; response/weight indices.
    std::vector<std::size_t> feature_cols;
    std::ptrdiff_t response_col = -1;
    std::ptrdiff_t weight_col = -1;
    std::string line;
    std::vector<std::pair<std::size_t, std::size_t>> cell_spans;  // scratch

    // Binary.
    std::uint64_t binary_rows_total = 0;
    std::vector<double> row_buffer;

    void open(const std::string& path);
    void open_csv_header();
    void open_binary_header();
    bool next_csv(DataBatch& out);
    bool next_binary(DataBatch& out);
};

void BatchStream::Impl::open(const std::string& path) {
    file.open(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "'");
    g_passes.fetch_add(1, std::memory_order_relaxed);

    char magic[4] = {};
    file.read(magic, 4);
    if (file.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0) {
        binary = true;
        open_binary_header();
        return;
    }
    file.clear();
    file.seekg(0);
    open_csv_header();
}

void BatchStream::Impl::open_csv_header() {
    // Skip metadata lines, then read the header.
    bool have_header = false;
    while (std::getline(file, line)) {
        if (!line.empty() && line.front() == '#') continue;
        have_header = true;
        break;
    }
    if (!have_header) throw ParseError("missing CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    file_columns = header.size();
    auto find_col = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return -1;
        return it - header.begin();
    };

    if (!schema.response.empty()) {
        response_col = find_col(schema.response);
        if (response_col < 0) throw SchemaError("response column '" + schema.response +
                                                "' not found in header");
    }
    if (!schema.weight.empty()) {
        weight_col = find_col(schema.weight);
        if (weight_col < 0) throw SchemaError("weight column '" + schema.weight +
                                              "' not found in header");
    }

    if (schema.features.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == response_col ||
                static_cast<std::ptrdiff_t>(c) == weight_col) {
                continue;
            }
            feature_cols.push_back(c);
            feature_names.push_back(header[c]);
        }
    } else {
        for (const std::string& f : schema.features) {
            const std::ptrdiff_t c = find_col(f);
            if (c < 0) throw SchemaError("feature column '" + f + "' not found in header");
            feature_cols.push_back(static_cast<std::size_t>(c));
            feature_names.push_back(f);
        }
    }
    if (feature_cols.empty() && !schema.intercept && schema.response.empty()) {
        throw SchemaError("schema selects no columns at all");
    }
    p = feature_cols.size() + (schema.intercept ? 1 : 0);
}

void BatchStream::Impl::open_binary_header() {
    std::uint32_t version = 0;
    std::uint64_t n = 0;
    std::uint32_t cols = 0;
    file.read(reinterpret_cast<char*>(&version), sizeof(version));
    file.read(reinterpret_cast<char*>(&n), sizeof(n));
    file.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!file) throw ParseError("truncated binary header");
    if constexpr (std::endian::native == std::endian::big) {
        throw IoError("binary datasets are little-endian; big-endian hosts are unsupported");
    }
    if (version != kBinaryVersion) {
        throw VersionMismatch("binary dataset version " + std::to_string(version) +
                              " is unsupported");
    }
    if (cols < 1) throw ParseError("binary dataset needs at least one column");
    binary_rows_total = n;
    file_columns = cols;

    // Convention: last column is the response, named y; features are x1..xk.
    const std::size_t nfeat = cols - 1;
    std::vector<std::string> all_features;
    for (std::size_t i = 0; i < nfeat; ++i) all_features.push_back("x" + std::to_string(i + 1));

    if (!schema.weight.empty()) {
        throw SchemaError("binary datasets carry no weight column");
    }
    if (!schema.response.empty() && schema.response != "y") {
        throw SchemaError("binary datasets name their response 'y'");
    }
    if (schema.features.empty()) {
        feature_names = all_features;
        for (std::size_t i = 0; i < nfeat; ++i) feature_cols.push_back(i);
    } else {
        for (const std::string& f : schema.features) {
            const auto it = std::find(all_features.begin(), all_features.end(), f);
            if (it == all_features.end()) {
                throw SchemaError("feature column '" + f + "' not found in binary dataset");
            }
            feature_cols.push_back(static_cast<std::size_t>(it - all_features.begin()));
            feature_names.push_back(f);
        }
    }
    if (feature_cols.empty() && !schema.intercept && schema.response.empty()) {
        throw SchemaError("schema selects no columns at all");
    }
    p = feature_names.size() + (schema.intercept ? 1 : 0);
    row_buffer.resize(file_columns);
}

bool BatchStream::Impl::next_csv(DataBatch& out) {
    const bool want_y = response_col >= 0;
    const bool want_w = weight_col >= 0;
    out.p = p;
    out.X.clear();
    out.y.clear();
    out.w.clear();
    out.rows = 0;

    while (out.rows < batch_size && std::getline(file, line)) {
        if (!line.empty() && line.front() == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::int64_t row_number = rows_read + 1;

        cell_spans.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cell_spans.emplace_back(start, line.size());
                break;
            }
            cell_spans.emplace_back(start, comma);
            start = comma + 1;
        }
        if (cell_spans.size() != file_columns) {
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(file_columns) + " cells, got " +
                             std::to_string(cell_spans.size()));
        }

        const char* base = line.data();
        if (schema.intercept) out.X.push_back(1.0);
        for (std::size_t c : feature_cols) {
            out.X.push_back(parse_cell(base + cell_spans[c].first, base + cell_spans[c].second,
                                       row_number, c));
        }
        if (want_y) {
            const auto& s = cell_spans[static_cast<std::size_t>(response_col)];
            out.y.push_back(parse_cell(base + s.first, base + s.second, row_number,
                                       static_cast<std::size_t>(response_col)));
        }
        if (want_w) {
            const auto& s = cell_spans[static_cast<std::size_t>(weight_col)];
            out.w.push_back(parse_cell(base + s.first, base + s.second, row_number,
                                       static_cast<std::size_t>(weight_col)));
        }
        ++out.rows;
        ++rows_read;
    }
    if (out.rows == 0) return false;
    ++batches_read;
    return true;
}

bool BatchStream::Impl::next_binary(DataBatch& out) {
    const bool want_y = !schema.response.empty();
    out.p = p;
    out.X.clear();
    out.y.clear();
    out.w.clear();
    out.rows = 0;

    while (out.rows < batch_size &&
           static_cast<std::uint64_t>(rows_read) < binary_rows_total) {
        file.read(reinterpret_cast<char*>(row_buffer.data()),
                  static_cast<std::streamsize>(file_columns * sizeof(double)));
        if (static_cast<std::size_t>(file.gcount()) != file_columns * sizeof(double)) {
            throw ParseError("binary dataset truncated at row " + std::to_string(rows_read + 1));
        }
        if (schema.intercept) out.X.push_back(1.0);
        for (std::size_t j : feature_cols) out.X.push_back(row_buffer[j]);
        if (want_y) out.y.push_back(row_buffer[file_columns - 1]);
        ++out.rows;
        ++rows_read;
    }
    if (out.rows == 0) return false;
    ++batches_read;
    return true;
}

BatchStream::BatchStream(const std::string& path, DatasetSchema schema, std::size_t batch_size)
    : impl_(std::make_unique<Impl>()) {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    schema.validate();
    impl_->schema = std::move(schema);
    impl_->batch_size = batch_size;
    impl_->open(path);
}

BatchStream::~BatchStream() = default;
BatchStream::BatchStream(BatchStream&&) noexcept = default;
BatchStream& BatchStream::operator=(BatchStream&&) noexcept = default;

bool BatchStream::next(DataBatch& out) {
    return impl_->binary ? impl_->next_binary(out) : impl_->next_csv(out);
}

std::size_t BatchStream::p() const { return impl_->p; }
const std::vector<std::string>& BatchStream::feature_names() const { return impl_->feature_names; }
bool BatchStream::has_weight() const { return impl_->weight_col >= 0; }
std::int64_t BatchStream::rows_read() const { return impl_->rows_read; }
std::int64_t BatchStream::batches_read() const { return impl_->batches_read; }

}  // namespace ssreg
