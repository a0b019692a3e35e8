#include "gradflow/path.hpp"

#include <algorithm>
#include <stdexcept>

namespace gradflow {

MeasurePath::MeasurePath(double t0, double dt, std::vector<GridMeasure> slices)
    : t0_(t0), dt_(dt), slices_(std::move(slices)) {
    if (slices_.empty()) throw std::invalid_argument("path needs at least one slice");
    if (slices_.size() > 1 && !(dt_ > 0.0))
        throw std::invalid_argument("time step must be positive");
    for (const GridMeasure& m : slices_) require_same_grid(m.grid(), slices_.front().grid());
}

MeasurePath MeasurePath::from_profiles(double t0, double dt,
                                       const std::vector<OccupationProfile>& profiles) {
    std::vector<GridMeasure> slices;
    slices.reserve(profiles.size());
    for (const OccupationProfile& p : profiles) slices.push_back(p.as_measure());
    return MeasurePath(t0, dt, std::move(slices));
}

MeasurePath MeasurePath::reversed() const {
    std::vector<GridMeasure> rev(slices_.rbegin(), slices_.rend());
    return MeasurePath(t0_, dt_, std::move(rev));
}

} // namespace gradflow
