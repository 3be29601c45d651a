#include "blocktri/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

namespace blocktri {

ComplexMatrix shift_matrix(Index n) {
  if (n < 1) throw std::invalid_argument("shift_matrix: n must be >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  return a;
}

ComplexMatrix corner_unit(Index n) {
  if (n < 1) throw std::invalid_argument("corner_unit: n must be >= 1");
  ComplexMatrix b = ComplexMatrix::Zero(n, n);
  b(n - 1, 0) = 1.0;
  return b;
}

ComplexMatrix block_diagonal(std::span<const ComplexMatrix> blocks) {
  Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

namespace {

// Tarjan's strongly connected components over the pattern i -> j for
// a(i, j) != 0, i != j.
std::vector<std::vector<Index>> pattern_components(const ComplexMatrix& a) {
  const Index n = a.rows();
  std::vector<Index> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<Index>> components;
  Index counter = 0;

  struct Frame {
    Index node;
    Index next;
  };
  std::vector<Frame> call;

  for (Index root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const Index v = f.node;
      bool descended = false;
      while (f.next < n) {
        const Index w = f.next++;
        if (w == v || a(v, w) == Complex(0.0)) continue;
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        std::vector<Index> comp;
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const Index parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return components;
}

}  // namespace

ComplexVector dense_eigenvalues(const ComplexMatrix& a) {
  require_square(a, "eigenvalues");
  if (a.rows() == 0) return ComplexVector(0);
  if (a.rows() == 1) return ComplexVector::Constant(1, a(0, 0));
  Eigen::ComplexSchur<ComplexMatrix> cs(a, false);
  if (cs.info() != Eigen::Success)
    throw SchurFailure("eigenvalues: Schur iteration did not converge",
                       std::numeric_limits<double>::infinity());
  return cs.matrixT().diagonal();
}

ComplexVector eigenvalues(const ComplexMatrix& a) {
  require_square(a, "eigenvalues");
  if (!a.allFinite())
    throw std::invalid_argument("eigenvalues: non-finite entries");
  ComplexVector out(a.rows());
  Index pos = 0;
  for (const auto& comp : pattern_components(a)) {
    const Index m = static_cast<Index>(comp.size());
    if (m == 1) {
      out(pos++) = a(comp[0], comp[0]);
      continue;
    }
    ComplexMatrix sub(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) sub(i, j) = a(comp[i], comp[j]);
    out.segment(pos, m) = dense_eigenvalues(sub);
    pos += m;
  }
  return out;
}

SpectralRadius spectral_radius(const ComplexMatrix& a) {
  require_square(a, "spectral_radius");
  SpectralRadius r;
  const Index n = a.rows();
  if (n == 0) return r;
  r.value = eigenvalues(a).cwiseAbs().maxCoeff();
  const double norm = operator_norm(a);
  if (norm == 0.0) return r;
  const ComplexMatrix m = a / norm;
  const ComplexMatrix pn = matrix_power(m, n);
  const ComplexMatrix p2n = pn * pn;
  r.gelfand_n = norm * std::pow(operator_norm(pn), 1.0 / static_cast<double>(n));
  r.gelfand_2n =
      norm * std::pow(operator_norm(p2n), 1.0 / static_cast<double>(2 * n));
  return r;
}

bool is_nilpotent(const ComplexMatrix& a, double tol) {
  require_square(a, "is_nilpotent");
  const double norm = operator_norm(a);
  if (norm == 0.0) return true;
  const ComplexMatrix m = a / norm;
  return operator_norm(matrix_power(m, a.rows())) <= tol;
}

SchurResiduals schur_residuals(const ComplexMatrix& a, const SchurForm& form) {
  SchurResiduals r;
  r.unitarity = unitarity_residual(form.unitary);
  r.strictly_lower = strictly_lower_max(form.upper);
  r.reconstruction =
      max_abs(form.unitary * form.upper * form.unitary.adjoint() - a);
  return r;
}

SchurForm schur(const ComplexMatrix& a, const Tolerances& tol) {
  require_square(a, "schur");
  const Index n = a.rows();
  if (n == 0) return {ComplexMatrix(0, 0), ComplexMatrix(0, 0)};
  if (!a.allFinite())
    throw SchurFailure("schur: non-finite input",
                       std::numeric_limits<double>::infinity());

  Eigen::ComplexSchur<ComplexMatrix> cs(a, true);
  if (cs.info() != Eigen::Success)
    throw SchurFailure("schur: QR iteration did not converge",
                       std::numeric_limits<double>::infinity());

  SchurForm form{cs.matrixU(), cs.matrixT()};
  const double lower = strictly_lower_max(form.upper);
  const double t_norm = operator_norm(form.upper);
  if (lower > tol.tri * (1.0 + t_norm))
    throw SchurFailure("schur: triangular factor has strictly-lower mass",
                       lower);
  form.upper.triangularView<Eigen::StrictlyLower>().setZero();

  const SchurResiduals r = schur_residuals(a, form);
  if (r.unitarity > tol.unit)
    throw SchurFailure("schur: unitary factor fails unitarity", r.unitarity);
  const double a_norm = operator_norm(a);
  if (r.reconstruction > tol.recon * a_norm)
    throw SchurFailure("schur: reconstruction residual too large",
                       r.reconstruction);
  return form;
}

namespace {

// Swaps diagonal entries k and k+1 of an upper-triangular T in place and
// accumulates the rotation into U.
void swap_adjacent(SchurForm& form, Index k) {
  ComplexMatrix& t = form.upper;
  const Complex t11 = t(k, k), t22 = t(k + 1, k + 1), t12 = t(k, k + 1);
  // Eigenvector of the 2x2 block for t22.
  const Complex x1 = t12, x2 = t22 - t11;
  const double len = std::hypot(std::abs(x1), std::abs(x2));
  if (len == 0.0) return;
  Eigen::Matrix2cd g;
  g << x1 / len, -std::conj(x2) / len, x2 / len, std::conj(x1) / len;

  t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
  t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
  form.unitary.middleCols(k, 2) = (form.unitary.middleCols(k, 2) * g).eval();
  t(k + 1, k) = 0.0;
}

}  // namespace

void reorder_schur(SchurForm& form,
                   const std::function<bool(Complex, Complex)>& before) {
  const Index n = form.upper.rows();
  // Bubble sort; swaps only touch adjacent entries.
  for (Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Index k = 0; k + 1 < n; ++k) {
      if (before(form.upper(k + 1, k + 1), form.upper(k, k))) {
        swap_adjacent(form, k);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
}

bool modulus_descending(Complex x, Complex y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ax != ay) return ax > ay;
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

namespace {

bool try_augment(Index u, const std::vector<std::vector<Index>>& adj,
                 std::vector<Index>& match_right, std::vector<char>& seen) {
  for (Index v : adj[u]) {
    if (seen[v]) continue;
    seen[v] = 1;
    if (match_right[v] == -1 ||
        try_augment(match_right[v], adj, match_right, seen)) {
      match_right[v] = u;
      return true;
    }
  }
  return false;
}

bool perfect_matching_within(const Eigen::MatrixXd& dist, double limit) {
  const Index n = dist.rows();
  std::vector<std::vector<Index>> adj(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (dist(i, j) <= limit) adj[i].push_back(j);
  std::vector<Index> match_right(n, -1);
  for (Index u = 0; u < n; ++u) {
    std::vector<char> seen(n, 0);
    if (!try_augment(u, adj, match_right, seen)) return false;
  }
  return true;
}

}  // namespace

double spectrum_distance(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size())
    throw DimensionError("spectrum_distance: multisets differ in size");
  const Index n = a.size();
  if (n == 0) return 0.0;
  Eigen::MatrixXd dist(n, n);
  std::vector<double> candidates;
  candidates.reserve(static_cast<size_t>(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      dist(i, j) = std::abs(a(i) - b(j));
      candidates.push_back(dist(i, j));
    }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (perfect_matching_within(dist, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

}  // namespace blocktri
