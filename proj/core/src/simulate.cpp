#include "ssreg/simulate.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "ssreg/dataset.hpp"
#include "ssreg/errors.hpp"

namespace ssreg {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Shortest decimal representation that round-trips exactly.
void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0,1] x [0,1).
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

void generate_synthetic(const SimulateConfig& config, const std::string& path) {
    if (config.n < 1) throw ConfigError("simulate: n must be >= 1");
    if (config.features < 1) throw ConfigError("simulate: need at least one feature");
    if (config.sigma < 0.0) throw ConfigError("simulate: sigma must be >= 0");
    if (config.beta.size() != config.features + 1) {
        throw ConfigError("simulate: beta must have length features + 1 (intercept first), got " +
                          std::to_string(config.beta.size()));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    Rng rng(config.seed);
    const std::size_t k = config.features;

    double beta_l1 = 0.0;
    for (double b : config.beta) beta_l1 += std::abs(b);
    const double positive_scale = std::max(1.0, beta_l1);

    if (config.format == DatasetFormat::csv) {
        std::string header = "# ssreg-dataset v1 rng=";
        header += kRngAlgorithmId;
        header += " seed=" + std::to_string(config.seed);
        header += " n=" + std::to_string(config.n);
        header += " features=" + std::to_string(k);
        header += " sigma=";
        append_double(header, config.sigma);
        header += " beta=";
        for (std::size_t j = 0; j < config.beta.size(); ++j) {
            if (j) header += ',';
            append_double(header, config.beta[j]);
        }
        header += " feature_dist=uniform[-1,1]";
        if (config.positive_y) {
            header += " positive_y=exp(y/";
            append_double(header, positive_scale);
            header += ")";
        }
        header += '\n';
        for (std::size_t j = 1; j <= k; ++j) header += "x" + std::to_string(j) + ",";
        header += "y\n";
        out.write(header.data(), static_cast<std::streamsize>(header.size()));

        std::string buf;
        buf.reserve(32 * (k + 1));
        for (std::int64_t i = 0; i < config.n; ++i) {
            buf.clear();
            double y = config.beta[0];
            for (std::size_t j = 0; j < k; ++j) {
                const double x = rng.uniform(-1.0, 1.0);
                y += config.beta[j + 1] * x;
                append_double(buf, x);
                buf += ',';
            }
            if (config.sigma > 0.0) y += config.sigma * rng.normal();
            if (config.positive_y) y = std::exp(y / positive_scale);
            append_double(buf, y);
            buf += '\n';
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        }
    } else {
        out.write(kBinaryMagic, 4);
        const std::uint32_t version = kBinaryVersion;
        const std::uint64_t n = static_cast<std::uint64_t>(config.n);
        const std::uint32_t cols = static_cast<std::uint32_t>(k + 1);
        out.write(reinterpret_cast<const char*>(&version), sizeof(version));
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));

        std::vector<double> row(k + 1);
        for (std::int64_t i = 0; i < config.n; ++i) {
            double y = config.beta[0];
            for (std::size_t j = 0; j < k; ++j) {
                const double x = rng.uniform(-1.0, 1.0);
                y += config.beta[j + 1] * x;
                row[j] = x;
            }
            if (config.sigma > 0.0) y += config.sigma * rng.normal();
            if (config.positive_y) y = std::exp(y / positive_scale);
            row[k] = y;
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(double)));
        }
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace ssreg
