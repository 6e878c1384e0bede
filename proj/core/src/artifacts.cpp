#include "ssreg/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace ssreg {

// Serialization backdoor kept out of the public accumulator API.
struct SsAccess {
    static void restore(LinRegSS& ss, std::int64_t n, double syy, RealVector sxy,
                        std::vector<double> sxx_upper) {
        ss.n_ = n;
        ss.s_yy_ = syy;
        ss.s_xy_ = std::move(sxy);
        ss.s_xx_.raw() = std::move(sxx_upper);
    }
    static void restore(WeightedSS& ss, std::int64_t n, double swyy, RealVector swxy,
                        std::vector<double> swxx_upper) {
        ss.n_ = n;
        ss.s_wyy_ = swyy;
        ss.s_wxy_ = std::move(swxy);
        ss.s_wxx_.raw() = std::move(swxx_upper);
    }
    static void restore(BoxCoxSS& ss, std::int64_t n, double slogy, RealVector scyy,
                        std::vector<RealVector> scxy, std::vector<double> sxx_upper) {
        ss.n_ = n;
        ss.s_logy_ = slogy;
        ss.s_cyy_ = std::move(scyy);
        ss.s_cxy_ = std::move(scxy);
        ss.s_xx_.raw() = std::move(sxx_upper);
    }
};

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ParseError("'" + path + "' does not hold a JSON object");
    return j;
}

void dump_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

void check_version(const json& j, const std::string& path, int expected) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw ParseError("'" + path + "' is missing schema_version");
    }
    const int v = j["schema_version"].get<int>();
    if (v != expected) {
        throw VersionMismatch("'" + path + "' has schema_version " + std::to_string(v) +
                              ", expected " + std::to_string(expected));
    }
}

template <typename T>
T require(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ParseError("'" + path + "' is missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' field '" + std::string(key) + "': " + e.what());
    }
}

json score_to_json(double score) {
    // JSON has no infinity literal; the degenerate-fit sentinel round-trips
    // as a string.
    if (std::isinf(score)) return score > 0 ? "inf" : "-inf";
    return score;
}

double score_from_json(const json& j, const std::string& path) {
    if (!j.contains("score")) throw ParseError("'" + path + "' is missing field 'score'");
    const json& s = j.at("score");
    if (s.is_string()) {
        const std::string v = s.get<std::string>();
        if (v == "inf") return std::numeric_limits<double>::infinity();
        if (v == "-inf") return -std::numeric_limits<double>::infinity();
        throw ParseError("'" + path + "' has unrecognized score '" + v + "'");
    }
    return s.get<double>();
}

json common_ss_header(const char* kind, std::size_t p, std::int64_t n) {
    json j;
    j["schema_version"] = kSsSchemaVersion;
    j["model_kind"] = kind;
    j["p"] = p;
    j["n"] = n;
    return j;
}

std::string ss_kind(const json& j, const std::string& path) {
    return require<std::string>(j, path, "model_kind");
}

LinRegSS linear_from_json(const json& j, const std::string& path) {
    const auto p = require<std::size_t>(j, path, "p");
    const auto n = require<std::int64_t>(j, path, "n");
    const auto syy = require<double>(j, path, "s_yy");
    auto sxy = require<RealVector>(j, path, "s_xy");
    auto sxx = require<std::vector<double>>(j, path, "s_xx_upper");
    if (sxy.size() != p || sxx.size() != p * (p + 1) / 2 || n < 0) {
        throw ParseError("'" + path + "' has inconsistent dimensions");
    }
    LinRegSS ss(p);
    SsAccess::restore(ss, n, syy, std::move(sxy), std::move(sxx));
    return ss;
}

WeightedSS weighted_from_json(const json& j, const std::string& path) {
    const auto p = require<std::size_t>(j, path, "p");
    const auto n = require<std::int64_t>(j, path, "n");
    const auto swyy = require<double>(j, path, "s_wyy");
    auto swxy = require<RealVector>(j, path, "s_wxy");
    auto swxx = require<std::vector<double>>(j, path, "s_wxx_upper");
    if (swxy.size() != p || swxx.size() != p * (p + 1) / 2 || n < 0) {
        throw ParseError("'" + path + "' has inconsistent dimensions");
    }
    WeightedSS ss(p);
    SsAccess::restore(ss, n, swyy, std::move(swxy), std::move(swxx));
    return ss;
}

BoxCoxSS boxcox_from_json(const json& j, const std::string& path) {
    const auto p = require<std::size_t>(j, path, "p");
    const auto n = require<std::int64_t>(j, path, "n");
    auto grid = require<RealVector>(j, path, "grid");
    const auto slogy = require<double>(j, path, "s_logy");
    auto scyy = require<RealVector>(j, path, "s_cyy");
    auto scxy = require<std::vector<RealVector>>(j, path, "s_cxy");
    auto sxx = require<std::vector<double>>(j, path, "s_xx_upper");
    if (grid.empty() || scyy.size() != grid.size() || scxy.size() != grid.size() ||
        sxx.size() != p * (p + 1) / 2 || n < 0) {
        throw ParseError("'" + path + "' has inconsistent dimensions");
    }
    for (const RealVector& v : scxy) {
        if (v.size() != p) throw ParseError("'" + path + "' has inconsistent s_cxy length");
    }
    BoxCoxSS ss(p, std::move(grid));
    SsAccess::restore(ss, n, slogy, std::move(scyy), std::move(scxy), std::move(sxx));
    return ss;
}

}  // namespace

void write_ss(const LinRegSS& ss, const std::string& path) {
    json j = common_ss_header("linear", ss.p(), ss.n());
    j["s_yy"] = ss.s_yy();
    j["s_xy"] = ss.s_xy();
    j["s_xx_upper"] = std::vector<double>(ss.s_xx_upper().begin(), ss.s_xx_upper().end());
    dump_json(j, path);
}

void write_ss(const WeightedSS& ss, const std::string& path) {
    json j = common_ss_header("weighted", ss.p(), ss.n());
    j["s_wyy"] = ss.s_wyy();
    j["s_wxy"] = ss.s_wxy();
    j["s_wxx_upper"] = std::vector<double>(ss.s_wxx_upper().begin(), ss.s_wxx_upper().end());
    dump_json(j, path);
}

void write_ss(const BoxCoxSS& ss, const std::string& path) {
    json j = common_ss_header("boxcox", ss.p(), ss.n());
    j["grid"] = ss.grid();
    j["s_logy"] = ss.s_logy();
    RealVector scyy;
    std::vector<RealVector> scxy;
    for (std::size_t ci = 0; ci < ss.grid().size(); ++ci) {
        scyy.push_back(ss.s_cyy(ci));
        scxy.push_back(ss.s_cxy(ci));
    }
    j["s_cyy"] = scyy;
    j["s_cxy"] = scxy;
    j["s_xx_upper"] = std::vector<double>(ss.s_xx_upper().begin(), ss.s_xx_upper().end());
    dump_json(j, path);
}

AnySS read_ss(const std::string& path) {
    const json j = load_json(path);
    check_version(j, path, kSsSchemaVersion);
    const std::string kind = ss_kind(j, path);
    if (kind == "linear") return linear_from_json(j, path);
    if (kind == "weighted") return weighted_from_json(j, path);
    if (kind == "boxcox") return boxcox_from_json(j, path);
    throw ParseError("'" + path + "' has unknown model_kind '" + kind + "'");
}

LinRegSS read_linear_ss(const std::string& path) {
    AnySS any = read_ss(path);
    if (auto* ss = std::get_if<LinRegSS>(&any)) return std::move(*ss);
    throw ConfigError("'" + path + "' does not hold linear sufficient statistics");
}

WeightedSS read_weighted_ss(const std::string& path) {
    AnySS any = read_ss(path);
    if (auto* ss = std::get_if<WeightedSS>(&any)) return std::move(*ss);
    throw ConfigError("'" + path + "' does not hold weighted sufficient statistics");
}

BoxCoxSS read_boxcox_ss(const std::string& path) {
    AnySS any = read_ss(path);
    if (auto* ss = std::get_if<BoxCoxSS>(&any)) return std::move(*ss);
    throw ConfigError("'" + path + "' does not hold Box-Cox sufficient statistics");
}

void write_any_ss(const AnySS& ss, const std::string& path) {
    std::visit([&](const auto& s) { write_ss(s, path); }, ss);
}

void write_model(const ModelArtifact& model, const std::string& path) {
    const FitResult& fit = model.fit;
    json j;
    j["schema_version"] = kModelSchemaVersion;
    j["model_kind"] = to_string(fit.model_kind);
    j["params"] = fit.param ? json(*fit.param) : json(nullptr);
    j["beta"] = fit.beta;
    j["sigma2"] = fit.sigma2;
    j["cov"] = fit.cov.upper_triangle();
    j["n"] = fit.n;
    j["p"] = fit.p;
    j["score"] = score_to_json(fit.score);
    j["used_generalized_inverse"] = fit.used_generalized_inverse;
    j["column_names"] = model.column_names;
    j["intercept_flag"] = model.intercept;
    dump_json(j, path);
}

ModelArtifact read_model(const std::string& path) {
    const json j = load_json(path);
    check_version(j, path, kModelSchemaVersion);

    ModelArtifact model;
    FitResult& fit = model.fit;
    fit.model_kind = model_kind_from_string(require<std::string>(j, path, "model_kind"));
    if (j.contains("params") && !j.at("params").is_null()) {
        fit.param = j.at("params").get<double>();
    }
    fit.beta = require<RealVector>(j, path, "beta");
    fit.sigma2 = require<double>(j, path, "sigma2");
    fit.n = require<std::int64_t>(j, path, "n");
    fit.p = require<std::size_t>(j, path, "p");
    if (fit.beta.size() != fit.p) throw ParseError("'" + path + "' beta length != p");
    const auto cov = require<std::vector<double>>(j, path, "cov");
    fit.cov = SymMatrix::from_upper(fit.p, cov);
    fit.score = score_from_json(j, path);
    fit.used_generalized_inverse = require<bool>(j, path, "used_generalized_inverse");
    model.column_names = require<std::vector<std::string>>(j, path, "column_names");
    model.intercept = require<bool>(j, path, "intercept_flag");
    return model;
}

}  // namespace ssreg
