#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace terracal::scm {

// Deformable-terrain grid. Node (ix, iy) sits at (x0 + ix*resolution, y0 + iy*resolution);
// each node owns one resolution^2 cell of area. Deformation is plastic and strictly
// vertical: elevation only ever decreases, and initial level = elevation + sinkage.
class HeightField {
  public:
    HeightField() = default;
    HeightField(int nx, int ny, double resolution, double x0 = 0.0, double y0 = 0.0,
                double z0 = 0.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double resolution() const { return res_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }

    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }
    double node_x(int ix) const { return x0_ + ix * res_; }
    double node_y(int iy) const { return y0_ + iy * res_; }

    double elevation(int ix, int iy) const { return elev_[index(ix, iy)]; }
    double sinkage(int ix, int iy) const { return sink_[index(ix, iy)]; }
    double shear_accum(int ix, int iy) const { return js_[index(ix, iy)]; }
    bool in_contact(int ix, int iy) const { return contact_[index(ix, iy)] != 0; }

    // plastic update: lowers the node to `z` (no-op if z is above the current level)
    void press_to(int ix, int iy, double z);
    void set_shear_accum(int ix, int iy, double js) { js_[index(ix, iy)] = js; }
    void set_contact(int ix, int iy, bool c) { contact_[index(ix, iy)] = c ? 1 : 0; }

    // packed (iy << 32 | ix) keys of nodes flagged in-contact, kept sorted so the
    // per-step release pass does not have to sweep the whole grid
    const std::vector<std::uint64_t>& contact_keys() const { return contact_keys_; }
    void set_contact_keys(std::vector<std::uint64_t> sorted_keys) {
        contact_keys_ = std::move(sorted_keys);
    }

    // CSV `ix,iy,x,y,z,sinkage,Js`
    std::string to_csv() const;

  private:
    int nx_ = 0, ny_ = 0;
    double res_ = 0.0, x0_ = 0.0, y0_ = 0.0;
    std::vector<double> elev_;
    std::vector<double> sink_;
    std::vector<double> js_;
    std::vector<std::uint8_t> contact_;
    std::vector<std::uint64_t> contact_keys_;
};

}  // namespace terracal::scm
