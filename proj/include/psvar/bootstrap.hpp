#pragma once

#include "psvar/decomp.hpp"
#include "psvar/irf.hpp"
#include "psvar/svar.hpp"
#include "psvar/var.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace psvar {

/// One panel member's baseline estimates, frozen for the resampling loop.
struct BootstrapMember {
  VarModel model;
  StructuralFactorization fact;
  LoadingMatrix loadings;
};

struct BootstrapInputs {
  std::vector<BootstrapMember> members;
  StructuralFactorization common;  // common structural shocks and their years
  Eigen::Index horizon = 20;
  IrfScale scale = IrfScale::unit_shock;
  bool accumulate = false;
};

enum class PseudoSeriesMode {
  fixed_design,  // y~ = y^ + u.
  recursive,     // y~ rebuilt through the estimated lag polynomial
};

struct BootstrapOptions {
  std::size_t repetitions = 1000;
  std::uint64_t seed = 0;
  double z = 1.645;
  std::size_t workers = 1;
  double max_drop_fraction = 0.10;
  PseudoSeriesMode mode = PseudoSeriesMode::fixed_design;
  VarOptions var;
};

/// Idiosyncratic shocks e - Lambda ebar over the member/common overlap.
struct IdiosyncraticShocks {
  std::string country_id;
  int first_year = 0;
  Eigen::MatrixXd values;
};

[[nodiscard]] IdiosyncraticShocks recover_idiosyncratic(const StructuralFactorization& member,
                                                        const LoadingMatrix& loadings,
                                                        const StructuralFactorization& common);

/// Time-index draws for one repetition. `common[y - first_year]` is the row
/// of the common shocks used at calendar year y for every member;
/// `idiosyncratic[i][t]` is the row of member i's idiosyncratic pool used at
/// its effective row t.
struct ResampleIndices {
  int first_year = 0;
  std::vector<Eigen::Index> common;
  std::vector<std::vector<Eigen::Index>> idiosyncratic;
};

struct ResampledShocks {
  std::vector<Eigen::MatrixXd> common;         // per member, aligned to its effective rows
  std::vector<Eigen::MatrixXd> idiosyncratic;  // per member
  std::vector<Eigen::MatrixXd> composite;      // Lambda * common + idiosyncratic
};

/// Calendar span covered by the members' effective samples.
struct YearRange {
  int first = 0;
  int last = -1;  // inclusive
};
[[nodiscard]] YearRange member_year_range(const std::vector<BootstrapMember>& members);

/// Uniform draws with replacement: one shared draw for the common shocks,
/// independent draws per member for the idiosyncratic shocks.
[[nodiscard]] ResampleIndices draw_indices(const BootstrapInputs& inputs,
                                           const std::vector<IdiosyncraticShocks>& pools,
                                           std::mt19937_64& rng);

/// Indices that reproduce the original shocks (calendar-aligned).
[[nodiscard]] ResampleIndices identity_indices(const BootstrapInputs& inputs,
                                               const std::vector<IdiosyncraticShocks>& pools);

[[nodiscard]] ResampledShocks resample_shocks(const BootstrapInputs& inputs,
                                              const std::vector<IdiosyncraticShocks>& pools,
                                              const ResampleIndices& indices);

/// Pseudo-series in the model's original coordinates: the J presample rows of
/// the data followed by fitted values plus B * e (fixed design), or the
/// lag-polynomial recursion driven by B * e (recursive).
[[nodiscard]] Eigen::MatrixXd pseudo_series(const VarModel& model,
                                            const StructuralFactorization& fact,
                                            const Eigen::MatrixXd& composite_shocks,
                                            PseudoSeriesMode mode = PseudoSeriesMode::fixed_design);

struct BootstrapResult {
  std::vector<std::string> variables;  // ordered labels for shocks and responses
  Eigen::Index horizon = 0;
  std::size_t requested = 0;
  std::size_t used = 0;
  std::size_t dropped = 0;
  std::uint64_t seed = 0;
  double z = 0.0;
  std::vector<std::size_t> kept;                    // repetition indices, ascending
  std::vector<std::vector<Eigen::MatrixXd>> draws;  // [kept rep][h](response, shock)
  std::vector<Eigen::MatrixXd> median;              // point estimate, [h](response, shock)
  std::vector<Eigen::MatrixXd> sigma;
  std::vector<Eigen::MatrixXd> lower;
  std::vector<Eigen::MatrixXd> upper;
  std::vector<std::string> failures;                // messages of dropped repetitions

  /// The (H+1) x used matrix of simulated medians for one response cell.
  [[nodiscard]] Eigen::MatrixXd simulated_medians(Eigen::Index shock, Eigen::Index response) const;
};

/// Member IRFs at the configured scale/accumulation.
[[nodiscard]] IrfTensor member_irf(const VarModel& model, const StructuralFactorization& fact,
                                   Eigen::Index horizon, IrfScale scale, bool accumulate);

[[nodiscard]] BootstrapResult run_bootstrap(const BootstrapInputs& inputs,
                                            const BootstrapOptions& options);

}  // namespace psvar
