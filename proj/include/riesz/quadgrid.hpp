#pragma once

// Gauss rules for the axis measures, tensor grids, and L^p norms and inner
// products of grid functions against the product measure.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "riesz/orthosys.hpp"

namespace riesz {

struct QuadRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // include the measure density
  std::size_t size() const { return nodes.size(); }
};

/// Plain Golub-Welsch rule for the probability measure with this Jacobi matrix.
QuadRule golub_welsch(const Recurrence& rec);

/// n-point Gauss rule for the axis measure. Function families use the Gauss
/// rule of the auxiliary polynomial measure mapped back to the axis variable,
/// which integrates every product phi_j phi_k with j + k <= 2n - 1 exactly.
QuadRule gauss_rule(const AxisSystem& sys, int n);

/// n-point Gauss-Legendre rule on [a, b] with unit weight.
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

class TensorGrid {
 public:
  explicit TensorGrid(std::vector<QuadRule> axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return weights_.size(); }
  const QuadRule& axis(int i) const { return axes_[i]; }
  std::vector<int> shape() const;

  /// Flat index runs with the last axis fastest.
  double node(std::size_t flat, int axis) const { return axes_[axis].nodes[index(flat, axis)]; }
  std::size_t index(std::size_t flat, int axis) const { return (flat / strides_[axis]) % axes_[axis].size(); }
  double weight(std::size_t flat) const { return weights_[flat]; }
  void point(std::size_t flat, std::span<double> x) const;

  bool same_as(const TensorGrid& other) const;

 private:
  std::vector<QuadRule> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const TensorGrid>;

/// Grid built from Gauss rules with n[i] nodes on axis i.
GridPtr make_grid(const std::vector<AxisSystem>& axes, const std::vector<int>& n);
GridPtr make_grid(const std::vector<AxisSystem>& axes, int n);

/// Values of a (possibly vector-valued) function at the nodes of a grid,
/// stored component-major.
class GridFn {
 public:
  GridFn() = default;
  explicit GridFn(GridPtr grid, int components = 1);

  using PointFn = std::function<double(std::span<const double>)>;
  static GridFn sample(GridPtr grid, const PointFn& f);

  const GridPtr& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t size() const { return grid_ ? grid_->size() : 0; }

  std::span<double> component(int c) { return {values_.data() + c * size(), size()}; }
  std::span<const double> component(int c) const { return {values_.data() + c * size(), size()}; }
  double& at(int c, std::size_t j) { return values_[c * size() + j]; }
  double at(int c, std::size_t j) const { return values_[c * size() + j]; }
  /// Euclidean norm over components at node j.
  double magnitude(std::size_t j) const;

 private:
  GridPtr grid_;
  int components_ = 0;
  std::vector<double> values_;
};

double lp_norm(const GridFn& g, double p);
double inner(const GridFn& f, const GridFn& g);

struct NormResult {
  double value = 0.0;
  double achieved_tol = 0.0;  // relative change at the last doubling
  int nodes_per_axis = 0;
  int doublings = 0;
};

struct ConvergeOptions {
  int start_nodes = 16;
  int max_nodes_per_axis = 1024;
  std::size_t max_grid_size = 1u << 22;
};

using GridEvaluator = std::function<GridFn(const GridPtr&)>;

/// Doubles node counts until successive L^p norms agree to relative tol.
NormResult converge_norm(const std::vector<AxisSystem>& axes, const GridEvaluator& g, double p, double tol,
                         const ConvergeOptions& opt = {});
NormResult converge_norm(const std::vector<AxisSystem>& axes, const GridFn::PointFn& g, double p, double tol,
                         const ConvergeOptions& opt = {});

}  // namespace riesz
