#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "geometry.hpp"

namespace dpplab {

// Node values on a Grid, evaluated off-grid by multilinear interpolation.
template <std::size_t N>
class GridFunction {
 public:
  using GridPtr = std::shared_ptr<const Grid<N>>;

  GridFunction() = default;
  explicit GridFunction(GridPtr grid, double fill = 0.0) : grid_(std::move(grid)), v_(grid_->size(), fill) {}
  GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->size()) fail_validation("GridFunction: value count does not match grid");
  }

  template <class F>
  static GridFunction sample(GridPtr grid, F&& fn) {
    GridFunction g(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) g.v_[i] = fn(grid->coord(i));
    return g;
  }

  const Grid<N>& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double at(const Vec<N>& x) const {
    const auto st = grid_->stencil(x);
    double s = 0.0;
    for (std::size_t k = 0; k < st.size; ++k) s += st.weight[k] * v_[st.node[k]];
    return s;
  }

  bool same_grid(const GridFunction& o) const { return grid_ == o.grid_; }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

}  // namespace dpplab
