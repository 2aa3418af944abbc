#pragma once

#include "hallsand/ingest.hpp"
#include "hallsand/sparse.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace hallsand {

enum class OperatorKind {
    RowShare,         ///< z_ij / sum_k z_ik
    LeakageAdjusted,  ///< leak_i * z_ij / sum_k z_ik
    MaxRow,           ///< z_ij / max_i sum_k z_ik
};

std::string_view to_string(OperatorKind kind);
/// Accepts "share", "leak", "max" and the enumerator names in kebab case.
std::optional<OperatorKind> parse_operator_kind(std::string_view text);

/// Per-node share of intermediate outflow in gross row use.
struct LeakageProfile {
    std::vector<double> leak;
    double mean_leakage = 0.0;
};

/// Requires row_use_total > 0 wherever the node has outflows; throws
/// InputError naming the node otherwise. Nodes without outflows get 0.
LeakageProfile leakage_profile(const IOTable& table);

struct PropagationOperator {
    OperatorKind kind = OperatorKind::LeakageAdjusted;
    int year = 0;
    CsrMatrix matrix;
    double spectral_radius = 0.0;
};

struct SpectralOptions {
    double tol = 1e-10;
    int max_iter = 10'000;
};

/// Builds one of the three normalisations. Rows with zero flow total stay
/// all-zero; the spectral radius is computed once here and cached.
PropagationOperator build_operator(const IOTable& table, OperatorKind kind,
                                   const SpectralOptions& spectral = {});

/// Spectral radius of a non-negative matrix.
///
/// The positive-entry pattern is split into strongly connected components;
/// a singleton contributes its diagonal entry and every larger block is
/// handled by power iteration on B + cI with c = half the largest row sum,
/// starting from the uniform vector. The shift makes the Perron root the
/// unique dominant eigenvalue, so periodic blocks converge instead of
/// oscillating. Each iterate x gives the bracket min_i (Mx)_i / x_i <=
/// rho <= max_i (Mx)_i / x_i; iteration stops once the bracket is narrower
/// than `tol` and returns its midpoint.
///
/// Returns 0 for an all-zero matrix. Throws ConvergenceError after
/// `max_iter` iterations on a block, carrying the last two estimates.
double spectral_radius(const CsrMatrix& matrix, const SpectralOptions& options = {});

}  // namespace hallsand
