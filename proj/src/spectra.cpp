#include "hashnets/spectra.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "hashnets/error.hpp"
#include "hashnets/parallel.hpp"

namespace hashnets {

SpectralReport spectral_report(const DenseMatrix& w, double rank_tol) {
  require(rank_tol >= 0.0, "rank tolerance must be non-negative");
  SpectralReport r;
  r.singular_values = singular_values(w);
  r.sigma_max = r.singular_values[0];
  r.sigma_min = r.singular_values[r.singular_values.size() - 1];
  r.condition = r.sigma_min > 0.0 ? r.sigma_max / r.sigma_min : std::numeric_limits<double>::infinity();
  const double fro = frobenius_norm(w);
  // the zero matrix has no meaningful stable rank; report 0
  r.stable_rank = r.sigma_max > 0.0 ? (fro / r.sigma_max) * (fro / r.sigma_max) : 0.0;
  r.full_rank = r.sigma_max > 0.0 && r.sigma_min > rank_tol * r.sigma_max;
  return r;
}

std::vector<SpectraRow> spectra_batch(const std::vector<NamedMatrix>& matrices, double rank_tol) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> shapes;
  for (const auto& m : matrices) {
    const auto [it, fresh] = shapes.emplace(m.name, std::make_pair(m.w.rows(), m.w.cols()));
    require(fresh || it->second == std::make_pair(m.w.rows(), m.w.cols()),
            "matrix '" + m.name + "' changes shape between seeds");
  }
  return parallel_map(matrices.size(), [&](std::size_t i) {
    return SpectraRow{matrices[i].seed, matrices[i].name, spectral_report(matrices[i].w, rank_tol)};
  });
}

}  // namespace hashnets
