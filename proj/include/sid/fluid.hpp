#pragma once

#include <string>
#include <vector>

#include "sid/polynomial.hpp"
#include "sid/types.hpp"

// Fluid element models: a triangle (2D) or tetrahedron (3D) of unit masses
// moving freely apart from the constraint that area / volume is constant.
//
// State layouts, vertex-major:
//   2D (12): x1 y1 u1 v1 | x2 y2 u2 v2 | x3 y3 u3 v3
//   3D (24): x1 y1 z1 u1 v1 w1 | ... | x4 y4 z4 u4 v4 w4
namespace sid::fluid {

inline constexpr int kDim2 = 12;
inline constexpr int kDim3 = 24;
inline constexpr double kDegenerateThreshold = 1e-10;

struct NamedPolynomial {
    std::string name;
    Polynomial poly;
};

std::vector<std::string> variable_names_2d();
std::vector<std::string> variable_names_3d();

// ---- 2D -------------------------------------------------------------------

double area_2d(const Vector& s);
double area_rate_2d(const Vector& s);

/// Numerator and denominator of the Lagrange multiplier.
struct Multiplier {
    double numerator;
    double denominator;
};
Multiplier multiplier_2d(const Vector& s);

/// Throws DegenerateConfigurationError when |denominator| <= threshold.
Vector field_2d(const Vector& s, double threshold = kDegenerateThreshold);

/// Removes the velocity component that changes the area, so dA/dt = 0.
Vector project_incompressible_2d(const Vector& s);

/// u_cm, v_cm, L_cm, L, E, A, D, omega, plus the auxiliary I, K, G, J.
std::vector<NamedPolynomial> quantities_2d();

// ---- 3D -------------------------------------------------------------------

/// Signed face-area vectors A_i (rows, one per vertex); the gradient of the
/// volume form with respect to vertex i.
Eigen::Matrix<double, 4, 3> face_areas_3d(const Vector& s);
/// Same construction applied to the velocities (B_i).
Eigen::Matrix<double, 4, 3> velocity_face_areas_3d(const Vector& s);

/// Volume form: the determinant of the edge vectors, six times the
/// geometric volume.
double volume_3d(const Vector& s);
double volume_rate_3d(const Vector& s);

/// p and q such that lambda = -2p/q.
Multiplier multiplier_3d(const Vector& s);

Vector field_3d(const Vector& s, double threshold = kDegenerateThreshold);

Vector project_incompressible_3d(const Vector& s);

/// u_cm, v_cm, w_cm, Lcm_x/y/z, L_x/y/z, E, V, D, C1..C4.
std::vector<NamedPolynomial> quantities_3d();

}  // namespace sid::fluid
