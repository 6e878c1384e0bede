// ssreg: streaming sufficient-statistics regression.
//
// Subcommands: simulate, fit, predict, evaluate, suffstats compute|merge|subtract.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssreg/artifacts.hpp"
#include "ssreg/dataset.hpp"
#include "ssreg/estimators.hpp"
#include "ssreg/pipeline.hpp"
#include "ssreg/simulate.hpp"

namespace {

using nlohmann::json;
using namespace ssreg;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Grid syntax: "start:stop:step" (endpoints inclusive within half a step) or a
// comma-separated list.
RealVector parse_grid(const std::string& text) {
    RealVector grid;
    const auto parse_num = [&](const std::string& s) {
        double v = 0.0;
        const char* b = s.data();
        const char* e = s.data() + s.size();
        const auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || ptr != e) {
            throw ConfigError("bad grid number '" + s + "'");
        }
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t colon = text.find(':', start);
            if (colon == std::string::npos) {
                parts.push_back(text.substr(start));
                break;
            }
            parts.push_back(text.substr(start, colon - start));
            start = colon + 1;
        }
        if (parts.size() != 3) throw ConfigError("grid must be start:stop:step");
        const double lo = parse_num(parts[0]);
        const double hi = parse_num(parts[1]);
        const double step = parse_num(parts[2]);
        if (step <= 0.0) throw ConfigError("grid step must be positive");
        if (hi < lo) throw ConfigError("grid stop must be >= start");
        for (int k = 0;; ++k) {
            const double v = lo + step * k;
            if (v > hi + step / 2.0) break;
            grid.push_back(v);
        }
    } else {
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t comma = text.find(',', start);
            const std::string tok =
                text.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            if (!tok.empty()) grid.push_back(parse_num(tok));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (grid.empty()) throw ConfigError("grid is empty");
    return grid;
}

RealVector parse_beta(const std::string& text) { return parse_grid(text); }

struct FitOptions {
    std::vector<std::string> data;
    std::string from_ss;
    std::string model = "linear";
    std::string response = "y";
    std::string weight;
    std::vector<std::string> features;
    bool intercept = false;
    std::size_t batch_size = kDefaultBatchSize;
    std::string grid_text;
    std::string out = "model.json";
    bool verbose = false;
    bool parallel = false;
};

void print_fit_summary(const FitResult& fit) {
    std::cerr << "model=" << to_string(fit.model_kind);
    if (fit.param) std::cerr << " param=" << format_double(*fit.param);
    std::cerr << " n=" << fit.n << " p=" << fit.p
              << " sigma2=" << format_double(fit.sigma2)
              << " score=" << (std::isinf(fit.score) ? "inf" : format_double(fit.score))
              << " generalized_inverse=" << (fit.used_generalized_inverse ? "true" : "false")
              << "\n";
}

void emit_metrics(bool verbose, const AccumulateResult& info, double stream_s, double fit_s,
                  std::size_t expected_passes = 0) {
    if (!verbose) return;
    json j;
    j["passes"] = info.passes;
    j["rows"] = info.rows;
    j["batches"] = info.batches;
    j["seconds"] = {{"stream", stream_s}, {"fit", fit_s}, {"total", stream_s + fit_s}};
    std::cerr << j.dump() << "\n";
    if (expected_passes > 0 && info.passes != expected_passes) {
        throw Error("pass counter " + std::to_string(info.passes) + " != expected " +
                    std::to_string(expected_passes));
    }
}

void write_trace_csv(const RidgeTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "lambda,sse,sigma2";
    if (!trace.rows.empty()) {
        for (std::size_t j = 0; j < trace.rows.front().beta.size(); ++j) out << ",beta" << j;
    }
    out << "\n";
    for (const RidgeTraceRow& row : trace.rows) {
        out << format_double(row.lambda) << ',' << format_double(row.sse) << ','
            << format_double(row.sigma2);
        for (double b : row.beta) out << ',' << format_double(b);
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

DatasetSchema schema_from(const FitOptions& opt, bool weighted) {
    DatasetSchema schema;
    schema.response = opt.response;
    schema.features = opt.features;
    schema.intercept = opt.intercept;
    if (weighted) schema.weight = opt.weight;
    schema.validate();
    return schema;
}

int cmd_fit(const FitOptions& opt) {
    const ModelKind kind = model_kind_from_string(opt.model);
    const bool from_files = !opt.data.empty();
    if (from_files == !opt.from_ss.empty()) {
        throw ConfigError("pass either --data or --from-ss");
    }

    RealVector grid;
    if (!opt.grid_text.empty()) grid = parse_grid(opt.grid_text);
    if ((kind == ModelKind::boxcox || kind == ModelKind::ridge) && grid.empty() &&
        from_files) {
        throw ConfigError("boxcox and ridge fits need --grid");
    }

    AccumulateResult info;
    const auto t0 = Clock::now();

    ModelArtifact artifact;
    artifact.intercept = opt.intercept;

    auto finish_columns = [&](std::size_t p) {
        if (!info.feature_names.empty() || from_files) {
            artifact.column_names = info.feature_names;
        } else {
            for (std::size_t i = 1; i + (artifact.intercept ? 1 : 0) <= p; ++i) {
                artifact.column_names.push_back("x" + std::to_string(i));
            }
        }
    };

    if (kind == ModelKind::linear || kind == ModelKind::ridge) {
        LinRegSS ss;
        if (from_files) {
            ss = accumulate_linear(opt.data, schema_from(opt, false), opt.batch_size, &info,
                                   opt.parallel);
        } else {
            ss = read_linear_ss(opt.from_ss);
        }
        const double stream_s = seconds_since(t0);
        const auto t1 = Clock::now();
        finish_columns(ss.p());

        if (kind == ModelKind::linear) {
            artifact.fit = fit_linear(ss);
            write_model(artifact, opt.out);
            print_fit_summary(artifact.fit);
            emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
            return 0;
        }

        // Ridge: single lambda writes one artifact, larger grids also write a
        // selection report and the trace table.
        if (grid.empty()) throw ConfigError("ridge fits need --grid");
        std::vector<FitResult> fits;
        fits.reserve(grid.size());
        for (double lambda : grid) fits.push_back(fit_ridge(ss, lambda));

        if (grid.size() == 1) {
            artifact.fit = fits.front();
            write_model(artifact, opt.out);
            print_fit_summary(artifact.fit);
            emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
            return 0;
        }

        const RidgeTrace trace = make_ridge_trace(fits);
        json report;
        report["schema_version"] = kModelSchemaVersion;
        report["model_kind"] = "ridge";
        report["grid"] = grid;
        report["selected_lambda"] = trace.selected_lambda;
        report["selection_rule_id"] = trace.selection_rule_id;
        report["stabilized"] = trace.stabilized;
        std::vector<std::string> paths;
        for (std::size_t k = 0; k < fits.size(); ++k) {
            artifact.fit = fits[k];
            const std::string path = opt.out + ".model." + std::to_string(k) + ".json";
            write_model(artifact, path);
            paths.push_back(path);
        }
        report["artifacts"] = paths;
        {
            std::ofstream rep(opt.out + ".selection.json");
            if (!rep) throw IoError("cannot write selection report");
            rep << report.dump(2) << "\n";
        }
        write_trace_csv(trace, opt.out + ".trace.csv");
        const auto best_it = std::find_if(fits.begin(), fits.end(), [&](const FitResult& f) {
            return *f.param == trace.selected_lambda;
        });
        artifact.fit = *best_it;
        write_model(artifact, opt.out + ".best.json");
        if (!trace.stabilized) {
            std::cerr << "warning: ridge trace did not stabilize within the grid; "
                         "largest lambda selected\n";
        }
        print_fit_summary(artifact.fit);
        emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
        return 0;
    }

    if (kind == ModelKind::weighted) {
        WeightedSS ss;
        if (from_files) {
            if (opt.weight.empty()) throw ConfigError("weighted fits need --weight");
            ss = accumulate_weighted(opt.data, schema_from(opt, true), opt.batch_size, &info,
                                     opt.parallel);
        } else {
            ss = read_weighted_ss(opt.from_ss);
        }
        const double stream_s = seconds_since(t0);
        const auto t1 = Clock::now();
        finish_columns(ss.p());
        artifact.fit = fit_weighted(ss);
        write_model(artifact, opt.out);
        print_fit_summary(artifact.fit);
        emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
        return 0;
    }

    // Box-Cox.
    BoxCoxSS ss;
    if (from_files) {
        ss = accumulate_boxcox(opt.data, schema_from(opt, false), grid, opt.batch_size, &info,
                               opt.parallel);
    } else {
        ss = read_boxcox_ss(opt.from_ss);
        if (!grid.empty() && grid != ss.grid()) {
            throw ConfigError("--grid disagrees with the grid stored in the SS artifact");
        }
    }
    const double stream_s = seconds_since(t0);
    const auto t1 = Clock::now();
    finish_columns(ss.p());

    const std::vector<BoxCoxFit> fits = fit_boxcox_all(ss);
    if (fits.size() == 1) {
        artifact.fit = fits.front().fit;
        write_model(artifact, opt.out);
        print_fit_summary(artifact.fit);
        emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
        return 0;
    }

    const BoxCoxFit& best = select_boxcox(fits);
    json report;
    report["schema_version"] = kModelSchemaVersion;
    report["model_kind"] = "boxcox";
    report["grid"] = ss.grid();
    json scores = json::array();
    for (const BoxCoxFit& f : fits) {
        scores.push_back(std::isinf(f.profile_loglik) ? json("inf") : json(f.profile_loglik));
    }
    report["profile_loglik"] = scores;
    report["selected_c"] = best.c;
    std::vector<std::string> paths;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        artifact.fit = fits[k].fit;
        const std::string path = opt.out + ".model." + std::to_string(k) + ".json";
        write_model(artifact, path);
        paths.push_back(path);
    }
    report["artifacts"] = paths;
    {
        std::ofstream rep(opt.out + ".selection.json");
        if (!rep) throw IoError("cannot write selection report");
        rep << report.dump(2) << "\n";
    }
    artifact.fit = best.fit;
    write_model(artifact, opt.out + ".best.json");
    print_fit_summary(artifact.fit);
    emit_metrics(opt.verbose, info, stream_s, seconds_since(t1), from_files ? opt.data.size() : 0);
    return 0;
}

struct SuffstatsOptions {
    std::string subcommand;
    FitOptions fit;  // reuses data/schema/grid/batch flags
    std::vector<std::string> inputs;
    std::string out = "ss.json";
};

int cmd_suffstats_compute(const FitOptions& opt) {
    const ModelKind kind = model_kind_from_string(opt.model);
    if (opt.data.empty()) throw ConfigError("suffstats compute needs --data");
    AccumulateResult info;
    if (kind == ModelKind::weighted) {
        if (opt.weight.empty()) throw ConfigError("weighted statistics need --weight");
        write_ss(accumulate_weighted(opt.data, schema_from(opt, true), opt.batch_size, &info,
                                     opt.parallel),
                 opt.out);
    } else if (kind == ModelKind::boxcox) {
        if (opt.grid_text.empty()) throw ConfigError("boxcox statistics need --grid");
        write_ss(accumulate_boxcox(opt.data, schema_from(opt, false), parse_grid(opt.grid_text),
                                   opt.batch_size, &info, opt.parallel),
                 opt.out);
    } else {
        write_ss(accumulate_linear(opt.data, schema_from(opt, false), opt.batch_size, &info,
                                   opt.parallel),
                 opt.out);
    }
    emit_metrics(opt.verbose, info, 0.0, 0.0);
    return 0;
}

int cmd_suffstats_merge(const std::vector<std::string>& inputs, const std::string& out) {
    if (inputs.size() < 2) throw ConfigError("merge needs at least two SS files");
    AnySS total = read_ss(inputs[0]);
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        AnySS next = read_ss(inputs[i]);
        if (total.index() != next.index()) {
            throw ConfigError("SS files hold different model kinds");
        }
        std::visit(
            [&](auto& acc) {
                using T = std::decay_t<decltype(acc)>;
                acc += std::get<T>(next);
            },
            total);
    }
    write_any_ss(total, out);
    return 0;
}

int cmd_suffstats_subtract(const std::vector<std::string>& inputs, const std::string& out) {
    if (inputs.size() != 2) throw ConfigError("subtract needs exactly two SS files");
    AnySS total = read_ss(inputs[0]);
    AnySS part = read_ss(inputs[1]);
    if (total.index() != part.index()) throw ConfigError("SS files hold different model kinds");
    std::visit(
        [&](auto& acc) {
            using T = std::decay_t<decltype(acc)>;
            acc -= std::get<T>(part);
        },
        total);
    write_any_ss(total, out);
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"Streaming closed-form regression on sufficient statistics"};
    app.require_subcommand(1);

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
    SimulateConfig sim_cfg;
    std::string sim_beta = "1,2";
    std::string sim_format = "csv";
    std::string sim_out = "data.csv";
    sim->add_option("--n", sim_cfg.n, "Number of rows")->required();
    sim->add_option("--features", sim_cfg.features, "Number of feature columns")->required();
    sim->add_option("--beta", sim_beta, "True coefficients, intercept first (comma list)");
    sim->add_option("--sigma", sim_cfg.sigma, "Noise standard deviation");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim->add_flag("--positive", sim_cfg.positive_y, "Rescale responses to be positive");
    sim->add_option("--format", sim_format, "csv or binary")
        ->check(CLI::IsMember({"csv", "binary"}));
    sim->add_option("--out", sim_out, "Output path")->required();

    // fit ---------------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "Fit model(s) with one pass over the data");
    FitOptions fit_opt;
    fit->add_option("--data", fit_opt.data, "Input dataset(s); repeat for shards");
    fit->add_option("--from-ss", fit_opt.from_ss, "Fit from an SS artifact instead of data");
    fit->add_option("--model", fit_opt.model, "linear | weighted | boxcox | ridge")
        ->check(CLI::IsMember({"linear", "weighted", "boxcox", "ridge"}));
    fit->add_option("--response", fit_opt.response, "Response column name");
    fit->add_option("--weight", fit_opt.weight, "Weight column name (weighted model)");
    fit->add_option("--features", fit_opt.features,
                    "Feature columns (default: all other columns)");
    fit->add_flag("--intercept", fit_opt.intercept, "Inject a constant-1 leading column");
    fit->add_option("--batch-size", fit_opt.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    fit->add_option("--grid", fit_opt.grid_text, "Parameter grid: start:stop:step or comma list");
    fit->add_option("--out", fit_opt.out, "Model artifact path (grids add suffixes)");
    fit->add_flag("--verbose", fit_opt.verbose, "Emit run metrics as a JSON line on stderr");
    fit->add_flag("--parallel", fit_opt.parallel, "One thread per input shard");

    // predict ------------------------------------------------------------------
    auto* pred = app.add_subcommand("predict", "Stream a dataset through a fitted model");
    std::string pred_model;
    std::string pred_data;
    std::string pred_out = "predictions.csv";
    std::size_t pred_batch = kDefaultBatchSize;
    bool pred_inverse = false;
    pred->add_option("--model", pred_model, "Model artifact")->required();
    pred->add_option("--data", pred_data, "Dataset to predict")->required();
    pred->add_option("--out", pred_out, "Prediction CSV path");
    pred->add_option("--batch-size", pred_batch, "Mini-batch size")->check(CLI::PositiveNumber);
    pred->add_flag("--inverse-transform", pred_inverse,
                   "Map Box-Cox predictions back to the response scale");

    // evaluate -------------------------------------------------------------------
    auto* eval = app.add_subcommand("evaluate", "Mean squared error of predictions");
    std::string eval_pred;
    std::string eval_data;
    std::string eval_response = "y";
    eval->add_option("--predictions", eval_pred, "Prediction CSV from `predict`")->required();
    eval->add_option("--data", eval_data, "Dataset holding the true responses")->required();
    eval->add_option("--response", eval_response, "Response column name");

    // suffstats ---------------------------------------------------------------
    auto* ss = app.add_subcommand("suffstats", "Compute and combine SS artifacts");
    ss->require_subcommand(1);
    auto* ss_compute = ss->add_subcommand("compute", "Stream data into an SS artifact");
    FitOptions ss_opt;
    ss_opt.out = "ss.json";
    ss_compute->add_option("--data", ss_opt.data, "Input dataset(s)")->required();
    ss_compute->add_option("--model", ss_opt.model, "linear | weighted | boxcox")
        ->check(CLI::IsMember({"linear", "weighted", "boxcox"}));
    ss_compute->add_option("--response", ss_opt.response, "Response column name");
    ss_compute->add_option("--weight", ss_opt.weight, "Weight column name");
    ss_compute->add_option("--features", ss_opt.features, "Feature columns");
    ss_compute->add_flag("--intercept", ss_opt.intercept, "Inject a constant-1 leading column");
    ss_compute->add_option("--batch-size", ss_opt.batch_size, "Mini-batch size")
        ->check(CLI::PositiveNumber);
    ss_compute->add_option("--grid", ss_opt.grid_text, "Box-Cox power grid");
    ss_compute->add_option("--out", ss_opt.out, "SS artifact path");
    ss_compute->add_flag("--verbose", ss_opt.verbose, "Emit run metrics");

    auto* ss_merge = ss->add_subcommand("merge", "Fieldwise sum of SS artifacts");
    std::vector<std::string> merge_inputs;
    std::string merge_out = "merged.json";
    ss_merge->add_option("inputs", merge_inputs, "SS files")->required()->expected(-2);
    ss_merge->add_option("--out", merge_out, "Output SS artifact");

    auto* ss_subtract = ss->add_subcommand("subtract", "Remove a shard's contribution");
    std::vector<std::string> sub_inputs;
    std::string sub_out = "subtracted.json";
    ss_subtract->add_option("inputs", sub_inputs, "total.json part.json")
        ->required()
        ->expected(2);
    ss_subtract->add_option("--out", sub_out, "Output SS artifact");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (sim->parsed()) {
        sim_cfg.beta = parse_beta(sim_beta);
        sim_cfg.format = sim_format == "binary" ? DatasetFormat::binary : DatasetFormat::csv;
        generate_synthetic(sim_cfg, sim_out);
        json j;
        j["beta"] = sim_cfg.beta;
        j["seed"] = sim_cfg.seed;
        j["n"] = sim_cfg.n;
        j["rng"] = kRngAlgorithmId;
        std::cout << j.dump() << "\n";
        return 0;
    }
    if (fit->parsed()) return cmd_fit(fit_opt);
    if (pred->parsed()) {
        const ModelArtifact model = read_model(pred_model);
        if (pred_inverse && model.fit.model_kind != ModelKind::boxcox) {
            throw ConfigError("--inverse-transform only applies to Box-Cox models");
        }
        RealVector predictions;
        predict_file(model, pred_data, pred_batch, pred_inverse, predictions);
        std::ofstream out(pred_out);
        if (!out) throw IoError("cannot open '" + pred_out + "' for writing");
        out << "prediction\n";
        for (double v : predictions) out << format_double(v) << "\n";
        if (!out) throw IoError("write failed for '" + pred_out + "'");
        std::cerr << "wrote " << predictions.size() << " predictions\n";
        return 0;
    }
    if (eval->parsed()) {
        DatasetSchema pred_schema;
        pred_schema.response = "prediction";
        BatchStream pred_stream(eval_pred, pred_schema, 4096);
        RealVector yhat;
        DataBatch batch;
        while (pred_stream.next(batch)) yhat.insert(yhat.end(), batch.y.begin(), batch.y.end());

        DatasetSchema truth_schema;
        truth_schema.response = eval_response;
        BatchStream truth_stream(eval_data, truth_schema, 4096);
        RealVector y;
        while (truth_stream.next(batch)) y.insert(y.end(), batch.y.begin(), batch.y.end());

        std::cout << format_double(mse(y, yhat)) << "\n";
        return 0;
    }
    if (ss_compute->parsed()) return cmd_suffstats_compute(ss_opt);
    if (ss_merge->parsed()) return cmd_suffstats_merge(merge_inputs, merge_out);
    if (ss_subtract->parsed()) return cmd_suffstats_subtract(sub_inputs, sub_out);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
