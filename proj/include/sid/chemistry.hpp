#pragma once

#include <array>
#include <string>
#include <vector>

#include "sid/polynomial.hpp"
#include "sid/types.hpp"

// Simplified ozone photochemistry: 11 species, 10 reactions, concentrations in
// ppm and time in minutes.
//
// Species order: O3 NO NO2 HCHO HO2 HO2H OH O HNO3 CO H2 [H2O]
namespace sid::chem {

inline constexpr int kSpecies = 11;
inline constexpr int kSpecies12 = 12;
inline constexpr int kReactions = 10;

enum Species : int { O3, NO, NO2, HCHO, HO2, HO2H, OH, O, HNO3, CO, H2, H2O };

using RateConstants = std::array<double, kReactions>;

/// Table values at 298 K and 1 atm, mid-day photolysis.
RateConstants default_rates();

std::vector<std::string> species_names(int n_species = kSpecies);

/// Net stoichiometric matrix, species x reactions (11 x 10).
Eigen::MatrixXi stoichiometry();

/// Reactant orders, species x reactions, used by the mass-action law.
Eigen::MatrixXi reactant_orders();

/// Atom counts per species in the 11-species model.
Eigen::VectorXi carbon_counts();
Eigen::VectorXi nitrogen_counts();
Eigen::VectorXi hydrogen_counts(int n_species = kSpecies);

/// 12 x 10 matrix: the 11-species matrix plus an H2O row that closes the
/// hydrogen balance of every reaction. Throws DomainError if any reaction
/// has an odd hydrogen imbalance.
Eigen::MatrixXi stoichiometry_12();

/// Mass-action rates r_j = k_j * prod_i C_i^order_ij.
Vector reaction_rates(const Vector& c, const RateConstants& k);

/// The 11 rate equations written out term by term.
Vector explicit_field(const Vector& c, const RateConstants& k);

/// B r for the given stoichiometric matrix (11 or 12 rows).
Vector mass_action_field(const Eigen::MatrixXi& b, const Vector& c, const RateConstants& k);

/// Replaces C_O and C_OH by their pseudo-steady-state values. Works on 11- or
/// 12-species vectors. Throws PssaSingularError on a zero denominator.
Vector pssa_fill(const Vector& c, const RateConstants& k);

/// Field of the reduced system: O and OH are filled algebraically and their
/// derivatives are zero. 11 or 12 species.
Vector pssa_field(const Vector& c, const RateConstants& k);

/// Full (non-PSSA) 12-species field.
Vector field_12(const Vector& c, const RateConstants& k);

/// Linear reference quantities.
Polynomial carbon_balance(int n_species = kSpecies);
Polynomial nitrogen_balance(int n_species = kSpecies);
Polynomial hydrogen_balance();  // 12 species only
/// The third invariant (6 O3 - 5 NO + ... ); the H2 coefficient depends on
/// k4/k5 so that it is exactly conserved by the full field.
Polynomial third_invariant(const RateConstants& k, int n_species = kSpecies);

/// Throws DomainError when any entry is negative or non-finite.
void check_concentrations(const Vector& c);

}  // namespace sid::chem
