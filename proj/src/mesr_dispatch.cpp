#include "ptin/mesr_dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

namespace ptin::dispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNoCount = std::numeric_limits<std::size_t>::max();
constexpr double kTol = 1e-9;

struct VehicleClass {
  double cap = 0.0;
  std::uint32_t mask = 0;
  std::vector<std::size_t> members;  // ascending vehicle index
};

// Exact minimum-vehicle cover of the first `k` stations using only arrivals
// within `threshold`.
class CoverSearch {
 public:
  CoverSearch(const DispatchInstance& inst, std::size_t k, double threshold) : inst_(inst), k_(k) {
    std::map<std::pair<double, std::uint32_t>, std::size_t, std::greater<>> index;
    for (std::size_t v = 0; v < inst.vehicles.size(); ++v) {
      const double cap = inst.capacity(v);
      if (!(cap > 0.0)) continue;
      std::uint32_t mask = 0;
      for (std::size_t s = 0; s < k; ++s) {
        if (inst.time(v, s) <= threshold) mask |= 1u << s;
      }
      if (mask == 0) continue;
      auto [it, fresh] = index.emplace(std::make_pair(cap, mask), classes_.size());
      if (fresh) classes_.push_back({cap, mask, {}});
      classes_[it->second].members.push_back(v);
    }
    // Larger capacities first, then by mask; the smallest capacity forms the
    // tail closed by the transportation check.
    std::sort(classes_.begin(), classes_.end(), [](const VehicleClass& a, const VehicleClass& b) {
      if (a.cap != b.cap) return a.cap > b.cap;
      return a.mask < b.mask;
    });
    big_ = classes_.size();
    if (!classes_.empty()) {
      const double small = classes_.back().cap;
      while (big_ > 0 && classes_[big_ - 1].cap == small) --big_;
    }
    suffix_.assign((classes_.size() + 1) * k_, 0.0);
    for (std::size_t c = classes_.size(); c-- > 0;) {
      for (std::size_t s = 0; s < k_; ++s) {
        suffix_[c * k_ + s] = suffix_[(c + 1) * k_ + s] +
                              ((classes_[c].mask >> s) & 1u ? classes_[c].cap *
                                                                  classes_[c].members.size()
                                                            : 0.0);
      }
    }
  }

  // Minimum number of vehicles, or kNoCount if the stations cannot be covered.
  std::size_t minimum() {
    std::vector<double> needs(k_);
    for (std::size_t s = 0; s < k_; ++s) needs[s] = std::max(0.0, inst_.stations[s].requirement_kw);
    root_needs_ = needs;
    return search(0, needs);
  }

  // Station per vehicle for the optimum found by minimum().
  std::vector<std::size_t> assignment() {
    std::vector<std::size_t> station(inst_.vehicles.size(), kNone);
    std::vector<double> needs = root_needs_;
    for (std::size_t c = 0; c < big_; ++c) {
      const auto& alloc = memo_.at({c, needs}).alloc;
      std::size_t next = 0;
      for (std::size_t s = 0; s < k_; ++s) {
        for (std::size_t n = 0; n < alloc[s]; ++n) station[classes_[c].members[next++]] = s;
        needs[s] = std::max(0.0, needs[s] - classes_[c].cap * alloc[s]);
        if (needs[s] <= kTol) needs[s] = 0.0;
      }
    }
    close_tail(needs, &station);
    return station;
  }

 private:
  struct Memo {
    std::size_t count = kNoCount;
    std::vector<std::size_t> alloc;
  };

  std::vector<std::size_t> units(const std::vector<double>& needs, double cap) const {
    std::vector<std::size_t> u(k_, 0);
    for (std::size_t s = 0; s < k_; ++s) {
      if (needs[s] > kTol) u[s] = static_cast<std::size_t>(std::ceil(needs[s] / cap - kTol));
    }
    return u;
  }

  // Tail classes share one capacity, so a station needs a fixed number of
  // them and feasibility is a transportation problem. Returns the count, and
  // when `station` is given writes the assignment via augmenting paths.
  std::size_t close_tail(const std::vector<double>& needs, std::vector<std::size_t>* station) const {
    bool any = false;
    for (double n : needs) any |= n > kTol;
    if (!any) return 0;
    if (big_ == classes_.size()) return kNoCount;
    const double cap = classes_.back().cap;
    const auto u = units(needs, cap);
    std::size_t total = 0;
    for (auto x : u) total += x;
    // Hall's condition over station subsets.
    for (std::uint32_t subset = 1; subset < (1u << k_); ++subset) {
      std::size_t demand = 0;
      for (std::size_t s = 0; s < k_; ++s) {
        if ((subset >> s) & 1u) demand += u[s];
      }
      if (demand == 0) continue;
      std::size_t supply = 0;
      for (std::size_t c = big_; c < classes_.size(); ++c) {
        if (classes_[c].mask & subset) supply += classes_[c].members.size();
      }
      if (supply < demand) return kNoCount;
    }
    if (station) assign_tail(u, *station);
    return total;
  }

  void assign_tail(const std::vector<std::size_t>& u, std::vector<std::size_t>& station) const {
    const std::size_t nc = classes_.size() - big_;
    std::vector<std::size_t> flow(nc * k_, 0);
    std::vector<std::size_t> used(nc, 0);
    std::vector<std::size_t> got(k_, 0);
    // Unit augmentations over the residual class/station graph.
    for (std::size_t target = 0; target < k_; ++target) {
      while (got[target] < u[target]) {
        // BFS from classes with spare vehicles to `target`.
        std::vector<std::size_t> prev_station(k_, kNone);  // class that reached station
        std::vector<std::size_t> prev_class(nc, kNone);    // station that reached class
        std::vector<std::uint8_t> seen_s(k_, 0);
        std::vector<std::uint8_t> seen_c(nc, 0);
        std::deque<std::size_t> queue;  // classes
        for (std::size_t c = 0; c < nc; ++c) {
          if (used[c] < classes_[big_ + c].members.size()) {
            seen_c[c] = 1;
            queue.push_back(c);
          }
        }
        bool found = false;
        while (!queue.empty() && !found) {
          const std::size_t c = queue.front();
          queue.pop_front();
          for (std::size_t s = 0; s < k_ && !found; ++s) {
            if (!((classes_[big_ + c].mask >> s) & 1u) || seen_s[s]) continue;
            seen_s[s] = 1;
            prev_station[s] = c;
            if (s == target) {
              found = true;
              break;
            }
            // Move one unit of s away from another class.
            for (std::size_t c2 = 0; c2 < nc; ++c2) {
              if (!seen_c[c2] && flow[c2 * k_ + s] > 0) {
                seen_c[c2] = 1;
                prev_class[c2] = s;
                queue.push_back(c2);
              }
            }
          }
        }
        if (!found) return;  // unreachable after a passing Hall check
        std::size_t s = target;
        while (true) {
          const std::size_t c = prev_station[s];
          ++flow[c * k_ + s];
          if (prev_class[c] == kNone) {
            ++used[c];
            break;
          }
          const std::size_t s_prev = prev_class[c];
          --flow[c * k_ + s_prev];
          s = s_prev;
        }
        ++got[target];
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      std::size_t next = 0;
      for (std::size_t s = 0; s < k_; ++s) {
        for (std::size_t n = 0; n < flow[c * k_ + s]; ++n) {
          station[classes_[big_ + c].members[next++]] = s;
        }
      }
    }
  }

  std::size_t search(std::size_t c, const std::vector<double>& needs) {
    for (std::size_t s = 0; s < k_; ++s) {
      if (needs[s] > suffix_[c * k_ + s] + kTol) return kNoCount;
    }
    if (c == big_) return close_tail(needs, nullptr);
    const auto key = std::make_pair(c, needs);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.count;

    Memo best;
    std::vector<std::size_t> alloc(k_, 0);
    const auto& cls = classes_[c];
    const auto cap_units = units(needs, cls.cap);
    std::vector<double> rest = needs;
    // Enumerate per-station counts for this class, station by station.
    auto rec = [&](auto&& self, std::size_t s, std::size_t left, std::size_t used) -> void {
      if (s == k_) {
        const std::size_t sub = search(c + 1, rest);
        if (sub != kNoCount && (best.count == kNoCount || sub + used < best.count)) {
          best.count = sub + used;
          best.alloc = alloc;
        }
        return;
      }
      const std::size_t top = (cls.mask >> s) & 1u ? std::min(left, cap_units[s]) : 0;
      const double saved = rest[s];
      for (std::size_t x = 0; x <= top; ++x) {
        alloc[s] = x;
        rest[s] = std::max(0.0, saved - cls.cap * x);
        if (rest[s] <= kTol) rest[s] = 0.0;
        self(self, s + 1, left - x, used + x);
      }
      alloc[s] = 0;
      rest[s] = saved;
    };
    rec(rec, 0, cls.members.size(), 0);
    memo_[key] = best;
    return best.count;
  }

  const DispatchInstance& inst_;
  std::size_t k_;
  std::vector<VehicleClass> classes_;
  std::size_t big_ = 0;
  std::vector<double> suffix_;
  std::vector<double> root_needs_;
  std::map<std::pair<std::size_t, std::vector<double>>, Memo> memo_;
};

std::vector<double> distinct_times(const DispatchInstance& inst, std::size_t k) {
  std::vector<double> times;
  for (std::size_t v = 0; v < inst.vehicles.size(); ++v) {
    if (!(inst.capacity(v) > 0.0)) continue;
    for (std::size_t s = 0; s < k; ++s) {
      const double t = inst.time(v, s);
      if (std::isfinite(t)) times.push_back(t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

bool prefix_trivial(const DispatchInstance& inst, std::size_t k) {
  for (std::size_t s = 0; s < k; ++s) {
    if (inst.stations[s].requirement_kw > kTol) return false;
  }
  return true;
}

// Optimal station per vehicle for the first k stations, or empty if the
// prefix cannot be covered at all.
std::optional<std::vector<std::size_t>> solve_prefix(const DispatchInstance& inst, std::size_t k) {
  if (prefix_trivial(inst, k)) return std::vector<std::size_t>(inst.vehicles.size(), kNone);
  const auto times = distinct_times(inst, k);
  if (times.empty()) return std::nullopt;
  if (CoverSearch(inst, k, times.back()).minimum() == kNoCount) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = times.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (CoverSearch(inst, k, times[mid]).minimum() != kNoCount) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  CoverSearch final_search(inst, k, times[lo]);
  final_search.minimum();
  return final_search.assignment();
}

}  // namespace

double DispatchInstance::capacity(std::size_t v) const {
  const auto& veh = vehicles[v];
  if (expected_capacity && veh.kind == VehicleKind::ev) return eta * veh.output_kw;
  return veh.output_kw;
}

std::size_t DispatchSolution::station_of(std::size_t v, std::size_t stations) const {
  for (std::size_t s = 0; s < stations; ++s) {
    if (assign[v * stations + s]) return s;
  }
  return kNone;
}

DispatchSolution solve(const DispatchInstance& inst) {
  const std::size_t ns = inst.stations.size();
  const std::size_t nv = inst.vehicles.size();
  if (ns > 20) throw std::invalid_argument("dispatch supports at most 20 stations");

  std::size_t k = ns;
  auto station = solve_prefix(inst, k);
  while (!station && k > 0) {
    --k;
    station = solve_prefix(inst, k);
  }
  if (!station) station = std::vector<std::size_t>(nv, kNone);

  DispatchSolution sol;
  sol.assign.assign(nv * ns, 0);
  sol.delivered_kw.assign(ns, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    if ((*station)[v] == kNone) continue;
    sol.assign[v * ns + (*station)[v]] = 1;
    sol.delivered_kw[(*station)[v]] += inst.capacity(v);
  }

  if (k < ns) {
    // Spread the remaining vehicles over the uncovered stations so that each
    // receives capacity in proportion to its requirement; faster vehicles go
    // first.
    std::vector<std::size_t> leftover;
    std::vector<double> best_time(nv, kInf);
    for (std::size_t v = 0; v < nv; ++v) {
      if ((*station)[v] != kNone || !(inst.capacity(v) > 0.0)) continue;
      for (std::size_t s = k; s < ns; ++s) best_time[v] = std::min(best_time[v], inst.time(v, s));
      if (std::isfinite(best_time[v])) leftover.push_back(v);
    }
    std::stable_sort(leftover.begin(), leftover.end(),
                     [&](std::size_t a, std::size_t b) { return best_time[a] < best_time[b]; });
    for (std::size_t v : leftover) {
      std::size_t pick = kNone;
      double pick_ratio = kInf;
      for (std::size_t s = k; s < ns; ++s) {
        const double req = inst.stations[s].requirement_kw;
        if (!std::isfinite(inst.time(v, s)) || !(req > 0.0)) continue;
        if (sol.delivered_kw[s] >= req - kTol) continue;
        const double ratio = sol.delivered_kw[s] / req;
        if (ratio < pick_ratio) {
          pick_ratio = ratio;
          pick = s;
        }
      }
      if (pick == kNone) continue;
      sol.assign[v * ns + pick] = 1;
      sol.delivered_kw[pick] += inst.capacity(v);
    }
  }

  sol.shortfall_kw.assign(ns, 0.0);
  sol.feasible = true;
  for (std::size_t s = 0; s < ns; ++s) {
    const double gap = inst.stations[s].requirement_kw - sol.delivered_kw[s];
    if (gap > kTol) {
      sol.shortfall_kw[s] = gap;
      sol.feasible = false;
    }
  }
  sol.covered_prefix = 0;
  while (sol.covered_prefix < ns && sol.shortfall_kw[sol.covered_prefix] == 0.0) {
    ++sol.covered_prefix;
  }
  sol.objective_s = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t s = 0; s < ns; ++s) {
      if (!sol.assign[v * ns + s]) continue;
      ++sol.vehicles_used;
      sol.objective_s = std::max(sol.objective_s, inst.time(v, s));
    }
  }
  return sol;
}

std::vector<std::string> validate(const DispatchInstance& inst, const DispatchSolution& sol) {
  std::vector<std::string> issues;
  const std::size_t ns = inst.stations.size();
  const std::size_t nv = inst.vehicles.size();
  if (sol.assign.size() != nv * ns) {
    issues.push_back("assignment matrix has the wrong shape");
    return issues;
  }
  std::vector<double> delivered(ns, 0.0);
  double latest = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    std::size_t count = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (!sol.assign[v * ns + s]) continue;
      ++count;
      delivered[s] += inst.capacity(v);
      const double t = inst.time(v, s);
      if (!std::isfinite(t)) {
        issues.push_back("vehicle " + inst.vehicles[v].id + " assigned to unreachable station " +
                         inst.stations[s].id);
      } else {
        latest = std::max(latest, t);
      }
    }
    if (count > 1) {
      issues.push_back("single assignment violated: vehicle " + inst.vehicles[v].id +
                       " assigned to " + std::to_string(count) + " stations");
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    const double req = inst.stations[s].requirement_kw;
    if (delivered[s] + 1e-6 < req) {
      std::ostringstream msg;
      msg << "requirement cover violated at station " << inst.stations[s].id << ": delivered "
          << delivered[s] << " kW < " << req << " kW (shortfall " << req - delivered[s] << " kW)";
      issues.push_back(msg.str());
    }
  }
  if (std::abs(latest - sol.objective_s) > 1e-6) {
    std::ostringstream msg;
    msg << "objective " << sol.objective_s << " s differs from latest assigned arrival " << latest
        << " s";
    issues.push_back(msg.str());
  }
  return issues;
}

}  // namespace ptin::dispatch
