#include "inertsim/grid.hpp"

#include <cmath>

namespace inertsim {

Grid Grid::covering(double horizon, double step)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("Grid::covering: horizon must be positive");
    const auto intervals = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    return Grid(step, std::max<std::size_t>(intervals, 1) + 1);
}

std::size_t Grid::index_at_or_before(double t) const
{
    if (t <= 0.0)
        return 0;
    const auto k = static_cast<std::size_t>(std::floor(t / step + 1e-12));
    return std::min(k, n_points - 1);
}

SamplePath SamplePath::subsample(std::size_t stride) const
{
    if (stride == 0 || (size() - 1) % stride != 0)
        throw std::invalid_argument("SamplePath::subsample: stride must divide the interval count");
    std::vector<double> out;
    out.reserve((size() - 1) / stride + 1);
    for (std::size_t k = 0; k < size(); k += stride)
        out.push_back(values[k]);
    const Grid coarse(grid.step * static_cast<double>(stride), out.size());
    return SamplePath(coarse, std::move(out));
}

SamplePath operator+(const SamplePath& a, const SamplePath& b)
{
    if (!(a.grid == b.grid))
        throw std::invalid_argument("SamplePath +: grids differ");
    std::vector<double> v(a.values);
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] += b.values[k];
    return SamplePath(a.grid, std::move(v));
}

SamplePath operator*(double c, const SamplePath& a)
{
    std::vector<double> v(a.values);
    for (auto& x : v)
        x *= c;
    return SamplePath(a.grid, std::move(v));
}

}  // namespace inertsim
