#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace inertsim {

/// Uniform time grid t_k = k * step, k = 0 .. n_points - 1.
struct Grid
{
    double step = 1.0;
    std::size_t n_points = 2;

    Grid() = default;
    Grid(double step_, std::size_t n_points_) : step(step_), n_points(n_points_)
    {
        if (!(step > 0.0))
            throw std::invalid_argument("Grid: step must be positive");
        if (n_points < 2)
            throw std::invalid_argument("Grid: need at least two points");
    }

    /// Grid with the given step whose horizon covers `horizon`.
    static Grid covering(double horizon, double step);

    double horizon() const { return step * static_cast<double>(n_points - 1); }
    double time(std::size_t k) const { return step * static_cast<double>(k); }

    /// Index of the last grid point not after t (clamped to the grid).
    std::size_t index_at_or_before(double t) const;

    bool operator==(const Grid&) const = default;
};

/// A real path sampled on a uniform grid (fBm, amplitude, aggregate flow).
struct SamplePath
{
    Grid grid;
    std::vector<double> values;

    SamplePath() = default;
    SamplePath(Grid g, std::vector<double> v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.n_points)
            throw std::invalid_argument("SamplePath: length " + std::to_string(values.size())
                                        + " does not match grid size "
                                        + std::to_string(grid.n_points));
    }

    std::size_t size() const { return values.size(); }
    double front() const { return values.front(); }
    double back() const { return values.back(); }
    std::span<const double> view() const { return values; }

    /// Path restricted to every `stride`-th point.
    SamplePath subsample(std::size_t stride) const;
};

SamplePath operator+(const SamplePath& a, const SamplePath& b);
SamplePath operator*(double c, const SamplePath& a);

}  // namespace inertsim
