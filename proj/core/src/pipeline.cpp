#include "ssreg/pipeline.hpp"

#include <exception>
#include <thread>

#include "ssreg/artifacts.hpp"

namespace ssreg {

namespace {

// Streams one shard into a fresh accumulator built by make(p) and fed by
// feed(acc, batch).
template <typename Acc, typename Make, typename Feed>
Acc stream_shard(const std::string& path, const DatasetSchema& schema, std::size_t batch_size,
                 Make&& make, Feed&& feed, AccumulateResult* info) {
    BatchStream stream(path, schema, batch_size);
    Acc acc = make(stream.p());
    DataBatch batch;
    while (stream.next(batch)) feed(acc, batch);
    if (info) {
        info->rows += stream.rows_read();
        info->batches += stream.batches_read();
        info->passes += 1;
        if (info->feature_names.empty()) {
            info->feature_names = stream.feature_names();
            info->p = stream.p();
        } else if (info->feature_names != stream.feature_names()) {
            throw SchemaError("shard '" + path + "' resolves to different feature columns");
        }
    }
    return acc;
}

template <typename Acc, typename Make, typename Feed>
Acc accumulate_shards(const std::vector<std::string>& paths, const DatasetSchema& schema,
                      std::size_t batch_size, Make&& make, Feed&& feed, AccumulateResult* info,
                      bool parallel) {
    if (paths.empty()) throw ConfigError("no input data files given");

    if (!parallel || paths.size() == 1) {
        Acc total = stream_shard<Acc>(paths[0], schema, batch_size, make, feed, info);
        for (std::size_t i = 1; i < paths.size(); ++i) {
            total += stream_shard<Acc>(paths[i], schema, batch_size, make, feed, info);
        }
        return total;
    }

    std::vector<Acc> partial(paths.size());
    std::vector<AccumulateResult> partial_info(paths.size());
    std::vector<std::exception_ptr> errors(paths.size());
    std::vector<std::thread> workers;
    workers.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        workers.emplace_back([&, i]() {
            try {
                partial[i] = stream_shard<Acc>(paths[i], schema, batch_size, make, feed,
                                               &partial_info[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (std::thread& t : workers) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    Acc total = std::move(partial[0]);
    for (std::size_t i = 1; i < paths.size(); ++i) total += partial[i];
    if (info) {
        for (const AccumulateResult& pi : partial_info) {
            info->rows += pi.rows;
            info->batches += pi.batches;
            info->passes += pi.passes;
            if (info->feature_names.empty()) {
                info->feature_names = pi.feature_names;
                info->p = pi.p;
            } else if (info->feature_names != pi.feature_names) {
                throw SchemaError("shards resolve to different feature columns");
            }
        }
    }
    return total;
}

}  // namespace

LinRegSS accumulate_linear(const std::vector<std::string>& paths, const DatasetSchema& schema,
                           std::size_t batch_size, AccumulateResult* info, bool parallel) {
    if (schema.response.empty()) throw ConfigError("fitting needs a response column");
    return accumulate_shards<LinRegSS>(
        paths, schema, batch_size, [](std::size_t p) { return LinRegSS(p); },
        [](LinRegSS& acc, const DataBatch& b) { acc.add_batch(b.X.data(), b.rows, b.y.data()); },
        info, parallel);
}

WeightedSS accumulate_weighted(const std::vector<std::string>& paths,
                               const DatasetSchema& schema, std::size_t batch_size,
                               AccumulateResult* info, bool parallel) {
    if (schema.response.empty()) throw ConfigError("fitting needs a response column");
    if (schema.weight.empty()) throw ConfigError("weighted accumulation needs a weight column");
    return accumulate_shards<WeightedSS>(
        paths, schema, batch_size, [](std::size_t p) { return WeightedSS(p); },
        [](WeightedSS& acc, const DataBatch& b) {
            acc.add_batch(b.X.data(), b.rows, b.y.data(), b.w.data());
        },
        info, parallel);
}

BoxCoxSS accumulate_boxcox(const std::vector<std::string>& paths, const DatasetSchema& schema,
                           const RealVector& grid, std::size_t batch_size,
                           AccumulateResult* info, bool parallel) {
    if (schema.response.empty()) throw ConfigError("fitting needs a response column");
    if (grid.empty()) throw ConfigError("Box-Cox accumulation needs a non-empty grid");
    return accumulate_shards<BoxCoxSS>(
        paths, schema, batch_size, [&grid](std::size_t p) { return BoxCoxSS(p, grid); },
        [](BoxCoxSS& acc, const DataBatch& b) { acc.add_batch(b.X.data(), b.rows, b.y.data()); },
        info, parallel);
}

void predict_file(const ModelArtifact& model, const std::string& data_path,
                  std::size_t batch_size, bool inverse_transform, RealVector& out) {
    DatasetSchema schema;
    schema.features = model.column_names;
    schema.intercept = model.intercept;
    BatchStream stream(data_path, schema, batch_size);
    if (stream.p() != model.fit.p) {
        throw SchemaError("data file columns do not match the model's recorded schema");
    }
    DataBatch batch;
    while (stream.next(batch)) {
        for (std::size_t r = 0; r < batch.rows; ++r) {
            std::span<const double> x(batch.X.data() + r * batch.p, batch.p);
            out.push_back(predict(model.fit, x, inverse_transform));
        }
    }
}

}  // namespace ssreg
