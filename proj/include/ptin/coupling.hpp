#pragma once

// Cross-network coupling: which bus powers which facility, the coupled state
// sweep (power -> facilities -> traffic limits and CN comm -> bus/EV comm),
// damage application and the EV participation draw.

#include <cstdint>
#include <string>
#include <vector>

#include "ptin/model.hpp"

namespace ptin {

// A facility is powered when its supply bus is healthy, energized and has its
// load switch closed. Central CN nodes without a supply bus are gateways with
// their own backup supply and are always powered.
bool facility_powered(const PdnState& pdn, std::size_t supply_bus);

// Recomputes energization, facility power, traffic limits, CN connectivity and
// bus/EV comm until nothing changes. Returns the number of sweeps taken.
int refresh_coupled_state(Scenario& s);

// Faulted lines lose equipment and are opened; faulted buses lose equipment.
// Throws ScenarioError naming every unknown element.
Scenario apply_damage(const Scenario& s, const DamageSet& d);

// Indices of vehicles that can be dispatched now: every MESS, plus EVs that
// both communicate and participate.
std::vector<std::size_t> dispatchable_evs(const Scenario& s);

// Sets `participates` on every EV. Bernoulli: independent draws with
// probability eta from a generator seeded with `seed`. Exact: floor(eta * N)
// EVs chosen by a seeded shuffle.
void draw_participation(std::vector<Vehicle>& vehicles, double eta, ParticipationMode mode,
                        std::uint64_t seed);

// Sum of CN/UTN facility demand coupled to every bus.
std::vector<double> facility_load_per_bus(const Scenario& s);

// Cross-network invariants that must hold after every refresh.
std::vector<std::string> check_coupled_invariants(const Scenario& s);

}  // namespace ptin
