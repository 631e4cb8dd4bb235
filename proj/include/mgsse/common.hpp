#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mgsse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Raised for malformed inputs: bad ids, bad parameters, dimension mismatches.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ModelError(what);
}

// Portable draws on top of mt19937_64. The standard distributions are
// implementation-defined, so bits are mapped to numbers here to keep traces
// identical across standard libraries.
class Rng {
public:
    static constexpr const char* name = "mt19937_64";

    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return r % n;
    }

    // k distinct entries of pool, chosen uniformly (partial Fisher-Yates).
    template <class T>
    std::vector<T> sample(std::vector<T> pool, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace mgsse
