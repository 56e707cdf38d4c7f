#include "terracal/dem_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "terracal/io.hpp"

namespace terracal::dem {

double stable_dt(const MaterialParams& mat, double safety) {
    return safety * 0.1 * std::sqrt(mat.particle_mass() / mat.k_n);
}

static void run_chunked(int jobs, int threads, const auto& fn) {
    if (threads <= 1 || jobs < 2048) {
        for (int k = 0; k < jobs; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (jobs + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk, hi = std::min(jobs, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int k = lo; k < hi; ++k) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<Wrench> DemSolver::step(ParticleSystem& sys, std::vector<RigidImplement>& implements,
                                    double dt) {
    if (dt <= 0.0) throw std::invalid_argument("step: dt must be > 0");
    const double bound = stable_dt(sys.material);
    if (dt > bound * (1.0 + 1e-12))
        throw std::invalid_argument("step: dt " + io::format_double(dt) +
                                    " exceeds stability bound " + io::format_double(bound));

    const std::size_t n = sys.size();
    const double r = sys.material.radius;
    const double m = sys.material.particle_mass();
    const double inertia = sys.material.particle_inertia();
    const double inf = std::numeric_limits<double>::infinity();

    grid_.find_contacts(sys, implements, candidates_);
    loads_.resize(candidates_.size());

    // carry tangential history over: candidates and the ledger are both sorted
    // by contact key, so this is one linear merge
    {
        const auto& prev = ledger_.entries();
        std::size_t cursor = 0;
        for (std::size_t k = 0; k < candidates_.size(); ++k) {
            const std::uint64_t key = candidates_[k].key();
            while (cursor < prev.size() && prev[cursor].key < key) ++cursor;
            loads_[k].u_t =
                (cursor < prev.size() && prev[cursor].key == key) ? prev[cursor].u_t : Vec3{};
        }
    }

    // force pass: pure per-candidate work, safe to run in parallel
    run_chunked(static_cast<int>(candidates_.size()), threads_, [&](int k) {
        const ContactCandidate& c = candidates_[k];
        PairLoad& out = loads_[k];
        const bool pp = c.kind == ContactCandidate::Kind::ParticleParticle;

        double r_eff, m_eff;
        Vec3 v_n, v_t, w_j;
        if (pp) {
            effective_pair(r, r, m, m, r_eff, m_eff);
            w_j = sys.ang_vel[c.j];
            relative_velocities(sys.vel[c.i], sys.ang_vel[c.i], sys.pos[c.i], sys.vel[c.j], w_j,
                                sys.pos[c.j], c.point, c.normal, v_n, v_t);
        } else {
            effective_pair(r, inf, m, inf, r_eff, m_eff);
            const RigidImplement& impl = implements[c.j];
            w_j = impl.ang_vel;
            relative_velocities(sys.vel[c.i], sys.ang_vel[c.i], sys.pos[c.i], impl.velocity(), w_j,
                                impl.pos, c.point, c.normal, v_n, v_t);
        }

        out.u_t = update_tangential_displacement(out.u_t, v_t, c.normal, c.overlap, dt, sys.material);

        const Vec3 f_n = normal_force(c.overlap, r_eff, m_eff, v_n, c.normal, sys.material);
        out.f_t = tangential_force(c.overlap, r_eff, m_eff, v_t, out.u_t, sys.material);
        out.f_total = f_n + out.f_t;
        out.m_rr = rolling_torque(sys.ang_vel[c.i], w_j, r_eff, f_n, sys.material);
        // clamp so the resisting torque cannot reverse the relative spin within
        // one step (constant-direction torque chatters otherwise)
        const double w_rel = (sys.ang_vel[c.i] - w_j).norm();
        const double tau_limit = (pp ? 0.5 : 1.0) * inertia * w_rel / dt;
        const double tau = out.m_rr.norm();
        if (tau > tau_limit && tau > 0.0) out.m_rr *= tau_limit / tau;
    });

    // accumulation in candidate order: deterministic and exactly Newton-III
    force_.assign(n, Vec3{});
    torque_.assign(n, Vec3{});
    std::vector<Wrench> wrenches(implements.size());
    auto& next = next_ledger_.entries();
    next.resize(candidates_.size());
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
        const ContactCandidate& c = candidates_[k];
        const PairLoad& ld = loads_[k];
        next[k] = {c.key(), ld.u_t};
        force_[c.i] += ld.f_total;
        torque_[c.i] += (c.point - sys.pos[c.i]).cross(ld.f_t) - ld.m_rr;
        if (c.kind == ContactCandidate::Kind::ParticleParticle) {
            force_[c.j] -= ld.f_total;
            torque_[c.j] += (c.point - sys.pos[c.j]).cross(-ld.f_t) + ld.m_rr;
        } else {
            Wrench& w = wrenches[c.j];
            w.force -= ld.f_total;
            w.torque += (c.point - implements[c.j].pos).cross(-ld.f_total) + ld.m_rr;
        }
    }
    ledger_.swap(next_ledger_);

    // semi-implicit Euler
    double check = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sys.vel[i] += (sys.gravity + force_[i] / m) * dt;
        sys.pos[i] += sys.vel[i] * dt;
        sys.ang_vel[i] += torque_[i] * (dt / inertia);
        check += sys.vel[i].x + sys.pos[i].x + sys.ang_vel[i].x;
    }
    if (!std::isfinite(check)) {
        for (std::size_t i = 0; i < n; ++i)
            if (!sys.pos[i].finite() || !sys.vel[i].finite() || !sys.ang_vel[i].finite())
                throw std::runtime_error("step: non-finite state at particle " + std::to_string(i));
    }

    // implement free DOFs feel the soil reaction plus their load weight
    for (std::size_t b = 0; b < implements.size(); ++b) {
        RigidImplement& impl = implements[b];
        if (impl.free_axis) {
            const Vec3 d = *impl.free_axis;
            const double acc = wrenches[b].force.dot(d) / impl.load_mass + sys.gravity.dot(d);
            impl.dof_vel += acc * dt;
        }
        impl.pos += impl.velocity() * dt;
        if (impl.ang_vel.norm2() > 0.0) impl.orient.integrate(impl.ang_vel, dt);
    }
    return wrenches;
}

std::string WrenchLog::to_csv(std::size_t implement_index) const {
    std::string out = "t,fx,fy,fz,tx,ty,tz\n";
    using io::format_double;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const Wrench& w = rows[k][implement_index];
        out += format_double(t[k]) + ',' + format_double(w.force.x) + ',' + format_double(w.force.y) +
               ',' + format_double(w.force.z) + ',' + format_double(w.torque.x) + ',' +
               format_double(w.torque.y) + ',' + format_double(w.torque.z) + '\n';
    }
    return out;
}

}  // namespace terracal::dem
