#pragma once

// Helpers shared by the unit and acceptance tests. The oracles here are
// deliberately naive: dense storage, plain loops, no reuse of library code
// beyond the types needed to feed it.

#include "hallsand/dynamics.hpp"
#include "hallsand/ingest.hpp"
#include "hallsand/sparse.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hallsand::test {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("hallsand_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Random table with n nodes; some rows may be empty, gross use is at least
/// the outflow and sometimes much larger.
inline IOTable random_table(std::size_t n, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IOTable t;
    t.year = 2014;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string c = std::string(1, static_cast<char>('A' + i / 26)) + "X" +
                              std::string(1, static_cast<char>('A' + i % 26));
        t.nodes.push_back({c, "S1", i});
    }
    std::vector<Triplet> entries;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (u(rng) < density) entries.push_back({i, j, std::exp(3.0 * u(rng) - 1.0)});
        }
    }
    if (entries.empty()) entries.push_back({0, n > 1 ? std::size_t{1} : std::size_t{0}, 1.0});
    t.flows = CsrMatrix::from_triplets(n, std::move(entries));
    const auto out = t.flows.row_sums();
    t.row_use_total.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.row_use_total[i] = u(rng) < 0.2 ? out[i] : out[i] * (1.0 + 4.0 * u(rng));
    }
    return t;
}

inline Eigen::MatrixXd to_eigen(const CsrMatrix& m) {
    const std::size_t n = m.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = m.row_cols(i);
        const auto vals = m.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
        }
    }
    return d;
}

/// Largest eigenvalue modulus from a dense (Hessenberg QR) eigensolver.
inline double dense_spectral_radius(const CsrMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(m), false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Scalar-loop sandpile on dense storage. Consumes random numbers in the
/// same order as the library engine: one field draw, then one draw per node.
class NaiveEngine {
public:
    NaiveEngine(std::vector<std::vector<double>> a, std::vector<double> flow_share, std::vector<double> redundancy,
                std::vector<double> capacity, Params p, double sigma_D, std::uint64_t seed)
        : a_(std::move(a)),
          I_(std::move(flow_share)),
          D_(std::move(redundancy)),
          C_(std::move(capacity)),
          p_(std::move(p)),
          sigma_D_(sigma_D),
          rng_(seed),
          s_(a_.size(), 0.0) {}

    std::uint64_t step(double B_bar, double sigma_B) {
        const std::size_t n = s_.size();
        const double z = normal_(rng_);
        double B = B_bar + sigma_B * z;
        if (B < 0.0) B = 0.0;
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = p_.sigma_x * std::fabs(normal_(rng_));
        return advance(x, B);
    }

    /// Period with the draws supplied by the caller.
    std::uint64_t advance(const std::vector<double>& x, double B) {
        const std::size_t n = s_.size();
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double H = B * I_[i] / ((D_[i] / sigma_D_) * C_[i] + p_.epsilon);
            double inflow = 0.0;
            for (std::size_t j = 0; j < n; ++j) inflow += a_[j][i] * s_[j];
            double v = (1.0 - p_.delta) * s_[i] + p_.alpha * x[i] + p_.beta * inflow + p_.gamma * H;
            next[i] = v < 0.0 ? 0.0 : v;
        }
        s_ = next;

        std::uint64_t events = 0;
        std::vector<bool> ever(n, false);
        std::size_t rounds = 0;
        const std::size_t budget = p_.max_relax_rounds ? p_.max_relax_rounds : 10 * n;
        while (true) {
            std::vector<std::size_t> over;
            for (std::size_t i = 0; i < n; ++i) {
                if (s_[i] >= p_.theta) over.push_back(i);
            }
            if (over.empty()) break;
            if (rounds == budget) throw std::runtime_error("naive engine: round budget exhausted");
            ++rounds;
            std::vector<double> excess(over.size());
            for (std::size_t k = 0; k < over.size(); ++k) {
                excess[k] = s_[over[k]] - p_.reset_level;
                s_[over[k]] = p_.reset_level;
                ever[over[k]] = true;
                ++events;
            }
            for (std::size_t k = 0; k < over.size(); ++k) {
                for (std::size_t j = 0; j < n; ++j) {
                    s_[j] += (p_.redistribution_fraction * excess[k]) * a_[over[k]][j];
                }
            }
        }
        rounds_ = rounds;
        if (p_.count_mode == CountMode::UniqueNodes) {
            return static_cast<std::uint64_t>(std::count(ever.begin(), ever.end(), true));
        }
        return events;
    }

    const std::vector<double>& stress() const { return s_; }
    void set_stress(std::vector<double> s) { s_ = std::move(s); }
    std::size_t last_rounds() const { return rounds_; }

private:
    std::vector<std::vector<double>> a_;
    std::vector<double> I_, D_, C_;
    Params p_;
    double sigma_D_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::vector<double> s_;
    std::size_t rounds_ = 0;
};

inline std::vector<std::vector<double>> to_dense_rows(const CsrMatrix& m) {
    std::vector<std::vector<double>> d(m.size(), std::vector<double>(m.size(), 0.0));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) d[i][j] = m.at(i, j);
    }
    return d;
}

/// Approximate discrete power law by rounding a continuous Pareto draw from
/// x_min - 1/2. Draws above 1e15 are redrawn.
inline std::vector<std::uint64_t> discrete_power_law(std::size_t count, double alpha, std::uint64_t x_min,
                                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::uint64_t> out;
    out.reserve(count);
    const double lower = static_cast<double>(x_min) - 0.5;
    while (out.size() < count) {
        const double x = std::floor(lower * std::pow(1.0 - u(rng), -1.0 / (alpha - 1.0)) + 0.5);
        if (x > 1e15) continue;
        out.push_back(static_cast<std::uint64_t>(x));
    }
    return out;
}

}  // namespace hallsand::test
