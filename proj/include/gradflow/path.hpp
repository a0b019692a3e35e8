#ifndef GRADFLOW_PATH_HPP
#define GRADFLOW_PATH_HPP

#include <vector>

#include "gradflow/measures.hpp"

namespace gradflow {

/// Time-indexed measures on a shared grid, uniform time step. Occupation
/// paths ride along as measures whose densities are the occupation values.
class MeasurePath {
  public:
    MeasurePath(double t0, double dt, std::vector<GridMeasure> slices);

    static MeasurePath from_profiles(double t0, double dt,
                                     const std::vector<OccupationProfile>& profiles);

    std::size_t size() const { return slices_.size(); } // number of slices
    std::size_t intervals() const { return slices_.size() - 1; }
    double t0() const { return t0_; }
    double dt() const { return dt_; }
    double time(std::size_t k) const { return t0_ + dt_ * static_cast<double>(k); }
    const Grid& grid() const { return slices_.front().grid(); }
    const GridMeasure& slice(std::size_t k) const { return slices_[k]; }
    const std::vector<GridMeasure>& slices() const { return slices_; }

    MeasurePath reversed() const;

  private:
    double t0_;
    double dt_;
    std::vector<GridMeasure> slices_;
};

} // namespace gradflow

#endif
