#include "terracal/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::bev {

void GroundTruthSet::validate() const {
    for (std::size_t k = 1; k < sinkage.size(); ++k) {
        if (sinkage[k].plate_r == sinkage[k - 1].plate_r && sinkage[k].z <= sinkage[k - 1].z)
            throw std::runtime_error("ground truth: sinkage depths must be strictly increasing per plate");
    }
    for (std::size_t k = 1; k < steady.size(); ++k)
        if (steady[k].load_kg <= steady[k - 1].load_kg)
            throw std::runtime_error("ground truth: steady loads must be strictly increasing");
    auto finite = [](double v) { return std::isfinite(v); };
    for (const auto& p : sinkage)
        if (!finite(p.force) || !finite(p.z)) throw std::runtime_error("ground truth: non-finite sinkage entry");
    for (const auto& p : steady)
        if (!finite(p.torque)) throw std::runtime_error("ground truth: non-finite steady entry");
    for (const auto& p : transient)
        if (!finite(p.torque)) throw std::runtime_error("ground truth: non-finite transient entry");
}

std::string GroundTruthSet::to_csv() const {
    using io::format_double;
    std::string out;
    out += "[meta]\n";
    out += "gravity," + format_double(gravity) + "\n";
    out += "annulus_r_inner," + format_double(annulus_r_inner) + "\n";
    out += "annulus_r_outer," + format_double(annulus_r_outer) + "\n";
    out += "omega_deg_s," + format_double(omega_deg_s) + "\n";
    out += "[sinkage]\nplate_r,z,F\n";
    for (const auto& p : sinkage)
        out += format_double(p.plate_r) + ',' + format_double(p.z) + ',' + format_double(p.force) + '\n';
    out += "[steady]\nload,T\n";
    for (const auto& p : steady)
        out += format_double(p.load_kg) + ',' + format_double(p.torque) + '\n';
    out += "[transient]\nload,t,T\n";
    for (const auto& p : transient)
        out += format_double(p.load_kg) + ',' + format_double(p.t) + ',' + format_double(p.torque) + '\n';
    return out;
}

GroundTruthSet GroundTruthSet::from_csv(const std::string& text) {
    GroundTruthSet gt;
    std::istringstream in(text);
    std::string line, section;
    bool header_pending = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = line;
            header_pending = section != "[meta]";
            continue;
        }
        if (header_pending) {  // column header row
            header_pending = false;
            continue;
        }
        const auto f = io::split_csv(line);
        auto num = [&](std::size_t i) { return io::parse_double(f[i]); };
        if (section == "[meta]") {
            if (f.size() != 2)
                throw std::runtime_error("ground truth: bad meta row at line " + std::to_string(lineno));
            if (f[0] == "gravity") gt.gravity = num(1);
            else if (f[0] == "annulus_r_inner") gt.annulus_r_inner = num(1);
            else if (f[0] == "annulus_r_outer") gt.annulus_r_outer = num(1);
            else if (f[0] == "omega_deg_s") gt.omega_deg_s = num(1);
            else throw std::runtime_error("ground truth: unknown meta key '" + f[0] + "'");
        } else if (section == "[sinkage]") {
            if (f.size() != 3)
                throw std::runtime_error("ground truth: bad sinkage row at line " + std::to_string(lineno));
            gt.sinkage.push_back({num(0), num(1), num(2)});
        } else if (section == "[steady]") {
            if (f.size() != 2)
                throw std::runtime_error("ground truth: bad steady row at line " + std::to_string(lineno));
            gt.steady.push_back({num(0), num(1)});
        } else if (section == "[transient]") {
            if (f.size() != 3)
                throw std::runtime_error("ground truth: bad transient row at line " + std::to_string(lineno));
            gt.transient.push_back({num(0), num(1), num(2)});
        } else {
            throw std::runtime_error("ground truth: data before section header at line " +
                                     std::to_string(lineno));
        }
    }
    for (const auto& p : gt.sinkage)
        if (std::find(gt.plate_radii.begin(), gt.plate_radii.end(), p.plate_r) == gt.plate_radii.end())
            gt.plate_radii.push_back(p.plate_r);
    gt.validate();
    return gt;
}

}  // namespace terracal::bev
