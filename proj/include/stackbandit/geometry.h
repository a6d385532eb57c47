#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stackbandit/game.h"

namespace stackbandit {

// sigma: follower type -> follower action.
struct BestResponseAssignment {
  std::vector<int> actions;

  auto operator<=>(const BestResponseAssignment&) const = default;
};

// normal . x >= offset, or > offset when strict. All rows live on the
// leader simplex; `support` marks the coordinates allowed to be nonzero
// (all of them unless dominated leader actions were pruned).
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
  bool strict = false;
};

struct HalfspaceSystem {
  int dim = 0;
  std::vector<Halfspace> rows;
  std::vector<bool> support;

  // Closed system (strict rows relaxed) within `tol`, plus simplex membership.
  bool contains_closed(const Eigen::VectorXd& x, double tol = 1e-9) const;
  // Minimum slack over strict rows; +inf when there are none.
  double strict_slack(const Eigen::VectorXd& x) const;
};

struct RegionSummary {
  BestResponseAssignment sigma;   // expanded to all K types
  double witness_slack = 0.0;
  std::vector<Eigen::VectorXd> closure_vertices;
};

struct ExtremePoint {
  MixedStrategy strategy;
  BestResponseAssignment sigma;  // expanded to all K types
  bool perturbed = false;
  double shift_l1 = 0.0;         // ||x' - vertex||_1; zero when not perturbed
};

struct ExtremePointSet {
  double delta = 0.0;
  std::vector<ExtremePoint> points;
  std::vector<RegionSummary> regions;
};

// Raised when the interior-witness LP fails for a region; carries the
// offending assignment.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(const std::string& what, BestResponseAssignment sigma)
      : std::runtime_error(what), sigma_(std::move(sigma)) {}
  const BestResponseAssignment& sigma() const { return sigma_; }

 private:
  BestResponseAssignment sigma_;
};

struct TypeGrouping {
  std::vector<int> representatives;  // smallest type index of each group
  std::vector<int> group_of;         // type -> position in `representatives`
};

struct GeometryOptions {
  bool use_effective_types = true;
  bool prune_dominated = false;
};

// Best-response region X_z(sigma). Follower k prefers sigma(k) weakly to
// every larger action index and strictly to every smaller one, which is
// exactly the set where the tie rule returns sigma(k). Exact duplicate rows
// are dropped.
HalfspaceSystem region_halfspaces(const Game& game, const Context& z,
                                  const BestResponseAssignment& sigma);
HalfspaceSystem region_halfspaces(const PayoffTables& tables,
                                  const BestResponseAssignment& sigma);

// All vertices of the closed system, by brute-force enumeration of active
// sets. Rank-deficient active sets are skipped; an infeasible system yields
// an empty list.
std::vector<MixedStrategy> region_vertices(const HalfspaceSystem& system);

struct InteriorWitness {
  Eigen::VectorXd x;
  double slack = 0.0;
};

// Maximizes the minimum strict-row slack (capped at 1) subject to the
// non-strict rows. A non-positive slack means the strict system is empty;
// nullopt when the non-strict rows alone are infeasible.
std::optional<InteriorWitness> interior_witness(const HalfspaceSystem& system);

inline constexpr double kWitnessSlack = 1e-9;

ExtremePointSet approximate_extreme_points(const Game& game, const Context& z, double delta,
                                           const GeometryOptions& options = {});

TypeGrouping reduce_effective_types(const Game& game, const Context& z);
TypeGrouping reduce_effective_types(const PayoffTables& tables);

std::vector<int> prune_dominated_actions(const Game& game, const Context& z);
std::vector<int> prune_dominated_actions(const Eigen::MatrixXd& leader_payoffs);

// Externally supplied strategy menu. Each point must be a valid mixed
// strategy; when `claimed` is given, its best-response assignment must match.
// Throws std::invalid_argument listing every rejected point.
ExtremePointSet exogenous_extreme_points(
    const Game& game, const Context& z, const std::vector<Eigen::VectorXd>& points,
    const std::vector<BestResponseAssignment>* claimed = nullptr);

// Accepts [[x...], ...] or [{"x": [...], "sigma": [...]}, ...].
void parse_exogenous_points(const nlohmann::json& doc, std::vector<Eigen::VectorXd>* points,
                            std::vector<BestResponseAssignment>* claimed);

nlohmann::json extreme_points_to_json(const ExtremePointSet& set);

}  // namespace stackbandit
