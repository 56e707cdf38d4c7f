#include "terracal/heightfield.hpp"

#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::scm {

HeightField::HeightField(int nx, int ny, double resolution, double x0, double y0, double z0)
    : nx_(nx), ny_(ny), res_(resolution), x0_(x0), y0_(y0) {
    if (nx <= 0 || ny <= 0) throw std::invalid_argument("heightfield: grid dims must be > 0");
    if (resolution <= 0) throw std::invalid_argument("heightfield: resolution must be > 0");
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    elev_.assign(n, z0);
    sink_.assign(n, 0.0);
    js_.assign(n, 0.0);
    contact_.assign(n, 0);
}

void HeightField::press_to(int ix, int iy, double z) {
    const std::size_t k = index(ix, iy);
    if (z < elev_[k]) {
        sink_[k] += elev_[k] - z;
        elev_[k] = z;
    }
}

std::string HeightField::to_csv() const {
    using io::format_double;
    std::string out = "ix,iy,x,y,z,sinkage,Js\n";
    for (int iy = 0; iy < ny_; ++iy)
        for (int ix = 0; ix < nx_; ++ix) {
            const std::size_t k = index(ix, iy);
            out += std::to_string(ix) + ',' + std::to_string(iy) + ',' + format_double(node_x(ix)) +
                   ',' + format_double(node_y(iy)) + ',' + format_double(elev_[k]) + ',' +
                   format_double(sink_[k]) + ',' + format_double(js_[k]) + '\n';
        }
    return out;
}

}  // namespace terracal::scm
