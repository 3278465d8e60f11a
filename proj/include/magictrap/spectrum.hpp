#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "magictrap/hamiltonian.hpp"
#include "magictrap/pendular.hpp"

namespace magictrap {

/// Eigenvalues (ascending, h*MHz) and orthonormal eigenvectors of a
/// Hermitian operator.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // columns
  std::shared_ptr<const Basis> basis;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline void fix_phases(Eigen::MatrixXcd& vectors) {
  for (int c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    int imax = 0;
    double best = std::norm(col(0));
    for (int i = 1; i < col.size(); ++i) {
      const double a = std::norm(col(i));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    const Complex pivot = col(imax);
    const double mag = std::abs(pivot);
    if (mag > 0.0) col *= std::conj(pivot) / mag;
  }
}

}  // namespace detail

/// Dense Hermitian eigensolution (LAPACK divide and conquer). Real-symmetric
/// inputs take the faster real path; eigenvector phases are fixed by making
/// the largest-magnitude component real and positive.
inline Spectrum eigensolve(const OperatorMatrix& h) {
  const int n = h.dim();
  if (n == 0) throw std::invalid_argument("eigensolve: empty operator");
  const double scale = std::max(1.0, h.mat.cwiseAbs().maxCoeff());
  const double herm = h.hermiticity_error();
  if (herm > 1e-12 * scale)
    throw std::invalid_argument("eigensolve: operator is not Hermitian (error " +
                                std::to_string(herm / scale) + " relative)");

  Spectrum s;
  s.basis = h.basis;
  s.eigenvalues.resize(n);

  const double max_imag = h.mat.imag().cwiseAbs().maxCoeff();
  if (max_imag <= 1e-14 * scale) {
    Eigen::MatrixXd a = h.mat.real();
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                                    s.eigenvalues.data());
    if (info != 0)
      throw std::runtime_error("eigensolve: dsyevd failed, info=" +
                               std::to_string(info));
    s.eigenvectors = a.cast<Complex>();
  } else {
    Eigen::MatrixXcd a = h.mat;
    const int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', n,
        reinterpret_cast<lapack_complex_double*>(a.data()), n,
        s.eigenvalues.data());
    if (info != 0)
      throw std::runtime_error("eigensolve: zheevd failed, info=" +
                               std::to_string(info));
    s.eigenvectors = std::move(a);
  }
  detail::fix_phases(s.eigenvectors);
  return s;
}

namespace detail {

/// Consecutive eigenvalue clusters with internal gaps below the threshold.
inline std::vector<std::pair<int, int>> eigenvalue_clusters(
    const Eigen::VectorXd& values, double gap_mhz) {
  std::vector<std::pair<int, int>> out;  // [first, last] inclusive
  const int n = static_cast<int>(values.size());
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values(j + 1) - values(j) < gap_mhz) ++j;
    out.emplace_back(i, j);
    i = j + 1;
  }
  return out;
}

}  // namespace detail

/// Dynamic polarizabilities alpha_i = -d E_i / d I_trap for a chosen set of
/// states, via Hellmann-Feynman: alpha_i = -<psi_i|W|psi_i>. Within any
/// eigenvalue cluster with gaps below cluster_gap_mhz the projected W block
/// is diagonalized and its (negated) eigenvalues are reported, ascending.
/// Units follow W (h*MHz per kW/cm^2).
inline Eigen::VectorXd dynamic_polarizability_subset(
    const Spectrum& spec, const OperatorMatrix& w, const std::vector<int>& subset,
    double cluster_gap_mhz = 1e-6) {
  if (w.dim() != spec.size())
    throw std::invalid_argument("dynamic_polarizability: dimension mismatch");
  const auto clusters =
      detail::eigenvalue_clusters(spec.eigenvalues, cluster_gap_mhz);

  std::vector<char> wanted(static_cast<size_t>(spec.size()), 0);
  for (int i : subset) {
    if (i < 0 || i >= spec.size())
      throw std::invalid_argument("dynamic_polarizability: state index out of range");
    wanted[static_cast<size_t>(i)] = 1;
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(spec.size());
  for (const auto& [first, last] : clusters) {
    bool needed = false;
    for (int i = first; i <= last && !needed; ++i) needed = wanted[static_cast<size_t>(i)];
    if (!needed) continue;
    const int k = last - first + 1;
    const auto block = spec.eigenvectors.middleCols(first, k);
    if (k == 1) {
      const Complex val = (block.adjoint() * (w.mat * block))(0, 0);
      alpha(first) = -val.real();
    } else {
      const Eigen::MatrixXcd proj = block.adjoint() * (w.mat * block);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(proj);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("dynamic_polarizability: cluster solve failed");
      // -mu sorted ascending within the cluster
      for (int i = 0; i < k; ++i) alpha(first + i) = -es.eigenvalues()(k - 1 - i);
    }
  }

  Eigen::VectorXd out(subset.size());
  for (size_t i = 0; i < subset.size(); ++i) out(static_cast<Eigen::Index>(i)) = alpha(subset[i]);
  return out;
}

/// All-states version of dynamic_polarizability_subset.
inline Eigen::VectorXd dynamic_polarizability(const Spectrum& spec,
                                              const OperatorMatrix& w,
                                              double cluster_gap_mhz = 1e-6) {
  std::vector<int> all(static_cast<size_t>(spec.size()));
  std::iota(all.begin(), all.end(), 0);
  return dynamic_polarizability_subset(spec, w, all, cluster_gap_mhz);
}

/// Eigenstate with pendular labels and dynamic polarizability. States with
/// |m| > 0 are classified against the two-dimensional +-|m| subspace and
/// carry m_pair = true.
struct LabeledState {
  int index = 0;
  double energy_mhz = 0.0;
  double alpha_au = 0.0;
  double alpha_mhz_per_kw_cm2 = 0.0;
  int lambda = 0;
  int m_abs = 0;
  bool m_pair = false;
  double fidelity = 0.0;
  bool mixed = false;  // fidelity below the confidence threshold
};

/// Labels eigenstates by maximum squared overlap of their rotor content
/// (traced over nuclear spins) with pendular reference states.
inline std::vector<LabeledState> classify(
    const Spectrum& spec, const std::vector<PendularState>& pendular_refs,
    const std::vector<int>& subset, double fidelity_threshold = 0.5) {
  const Basis& basis = *spec.basis;
  const int n_max = basis.n_max();

  // candidates grouped as (lambda, |m|)
  struct Candidate {
    int lambda;
    int m_abs;
    std::vector<const PendularState*> members;
  };
  std::vector<Candidate> candidates;
  for (const auto& p : pendular_refs) {
    if (p.lambda > n_max || p.m < 0) continue;  // signed partner handled below
    Candidate c{p.lambda, p.m, {&p}};
    if (p.m > 0) {
      for (const auto& q : pendular_refs)
        if (q.lambda == p.lambda && q.m == -p.m) c.members.push_back(&q);
    }
    candidates.push_back(std::move(c));
  }

  std::vector<LabeledState> out;
  out.reserve(subset.size());
  for (const int idx : subset) {
    const auto vec = spec.eigenvectors.col(idx);
    LabeledState st;
    st.index = idx;
    st.energy_mhz = spec.eigenvalues(idx);
    double best = -1.0;
    for (const auto& cand : candidates) {
      double fid = 0.0;
      for (const PendularState* p : cand.members) {
        // sum over nuclear projections of |sum_N a_N psi[N, m, ma, mb]|^2
        for (int ta = -basis.spin_a().twice(); ta <= basis.spin_a().twice(); ta += 2) {
          for (int tb = -basis.spin_b().twice(); tb <= basis.spin_b().twice(); tb += 2) {
            Complex acc(0.0, 0.0);
            for (int n = std::abs(p->m); n <= n_max; ++n) {
              const int i = basis.index_of(n, p->m, HalfInteger::from_twice(ta),
                                           HalfInteger::from_twice(tb));
              if (i < 0) continue;
              const int slot = n - std::abs(p->m);
              if (slot >= p->amplitudes.size()) break;
              acc += p->amplitudes(slot) * vec(i);
            }
            fid += std::norm(acc);
          }
        }
      }
      if (fid > best) {
        best = fid;
        st.lambda = cand.lambda;
        st.m_abs = cand.m_abs;
        st.m_pair = cand.m_abs > 0;
      }
    }
    st.fidelity = best;
    st.mixed = best < fidelity_threshold;
    out.push_back(st);
  }
  return out;
}

/// Result of adiabatic state matching between two spectra.
struct TrackResult {
  std::vector<int> permutation;  // permutation[i] = matched index in `next`
  std::vector<double> fidelity;  // squared overlap of each match
};

namespace detail {

inline TrackResult greedy_assign(const Eigen::MatrixXd& overlap_sq,
                                 bool require_bijective) {
  const int rows = static_cast<int>(overlap_sq.rows());
  const int cols = static_cast<int>(overlap_sq.cols());
  if (require_bijective && rows != cols)
    throw std::invalid_argument("track: spectra have different sizes");

  struct Entry {
    double value;
    int row, col;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      entries.push_back({overlap_sq(r, c), r, c});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });

  TrackResult res;
  res.permutation.assign(static_cast<size_t>(rows), -1);
  res.fidelity.assign(static_cast<size_t>(rows), 0.0);
  std::vector<char> row_done(static_cast<size_t>(rows), 0);
  std::vector<char> col_done(static_cast<size_t>(cols), 0);
  int assigned = 0;
  for (const auto& e : entries) {
    if (assigned == rows) break;
    if (row_done[static_cast<size_t>(e.row)] || col_done[static_cast<size_t>(e.col)]) continue;
    res.permutation[static_cast<size_t>(e.row)] = e.col;
    res.fidelity[static_cast<size_t>(e.row)] = e.value;
    row_done[static_cast<size_t>(e.row)] = 1;
    col_done[static_cast<size_t>(e.col)] = 1;
    ++assigned;
  }
  return res;
}

}  // namespace detail

/// Greedy bijective assignment between two spectra on the same basis,
/// maximizing squared eigenvector overlaps in descending order.
inline TrackResult track(const Spectrum& prev, const Spectrum& next) {
  if (prev.size() != next.size())
    throw std::invalid_argument("track: spectra have different sizes");
  const Eigen::MatrixXcd overlap = prev.eigenvectors.adjoint() * next.eigenvectors;
  return detail::greedy_assign(overlap.cwiseAbs2(), true);
}

/// Tracks a subset of `prev` states into `next` (injective assignment).
inline TrackResult track_subset(const Spectrum& prev, const std::vector<int>& subset,
                                const Spectrum& next) {
  Eigen::MatrixXcd sel(prev.eigenvectors.rows(), subset.size());
  for (size_t i = 0; i < subset.size(); ++i)
    sel.col(static_cast<Eigen::Index>(i)) = prev.eigenvectors.col(subset[i]);
  const Eigen::MatrixXcd overlap = sel.adjoint() * next.eigenvectors;
  return detail::greedy_assign(overlap.cwiseAbs2(), false);
}

}  // namespace magictrap
