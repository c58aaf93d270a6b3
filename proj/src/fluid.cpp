#include "sid/fluid.hpp"

#include <array>
#include <cmath>

#include "sid/errors.hpp"

namespace sid::fluid {

namespace {

void check_size(const Vector& s, int n) {
    if (s.size() != n) {
        throw DimensionError("fluid state has length " + std::to_string(s.size()) + ", expected " +
                             std::to_string(n));
    }
}

// 2D component offsets inside a vertex block.
constexpr int X = 0, Y = 1, U = 2, V = 3;
int at2(int vertex, int comp) { return 4 * vertex + comp; }

// 3D component offsets inside a vertex block.
constexpr int PX = 0, PY = 1, PZ = 2, VU = 3, VV = 4, VW = 5;
int at3(int vertex, int comp) { return 6 * vertex + comp; }

// The three vertices other than i, ascending.
std::array<int, 3> others(int i) {
    std::array<int, 3> o{};
    int n = 0;
    for (int j = 0; j < 4; ++j) {
        if (j != i) {
            o[static_cast<std::size_t>(n++)] = j;
        }
    }
    return o;
}

// a_i (b_j - b_k) - a_j (b_i - b_k) + a_k (b_i - b_j)
double triple(const Vector& s, int a, int b, const std::array<int, 3>& v) {
    auto A = [&](int k) { return s[at3(k, a)]; };
    auto B = [&](int k) { return s[at3(k, b)]; };
    return A(v[0]) * (B(v[1]) - B(v[2])) - A(v[1]) * (B(v[0]) - B(v[2])) +
           A(v[2]) * (B(v[0]) - B(v[1]));
}

Eigen::Matrix<double, 4, 3> face_vectors(const Vector& s, int cx, int cy, int cz) {
    Eigen::Matrix<double, 4, 3> out;
    for (int i = 0; i < 4; ++i) {
        const auto o = others(i);
        const double sign = (i % 2 == 0) ? -1.0 : 1.0;
        out(i, 0) = sign * triple(s, cy, cz, o);
        out(i, 1) = -sign * triple(s, cx, cz, o);
        out(i, 2) = sign * triple(s, cx, cy, o);
    }
    return out;
}

}  // namespace

std::vector<std::string> variable_names_2d() {
    std::vector<std::string> names;
    for (int i = 1; i <= 3; ++i) {
        for (const char* c : {"x", "y", "u", "v"}) {
            names.push_back(c + std::to_string(i));
        }
    }
    return names;
}

std::vector<std::string> variable_names_3d() {
    std::vector<std::string> names;
    for (int i = 1; i <= 4; ++i) {
        for (const char* c : {"x", "y", "z", "u", "v", "w"}) {
            names.push_back(c + std::to_string(i));
        }
    }
    return names;
}

double area_2d(const Vector& s) {
    check_size(s, kDim2);
    const double x1 = s[at2(0, X)], y1 = s[at2(0, Y)];
    const double x2 = s[at2(1, X)], y2 = s[at2(1, Y)];
    const double x3 = s[at2(2, X)], y3 = s[at2(2, Y)];
    return x1 * y2 + x2 * y3 + x3 * y1 - x2 * y1 - x3 * y2 - x1 * y3;
}

namespace {

// d(dA/dt)/d(velocity), zero in the position slots.
Vector area_rate_gradient_2d(const Vector& s) {
    Vector g = Vector::Zero(kDim2);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const int k = (i + 2) % 3;
        g[at2(i, U)] = s[at2(j, Y)] - s[at2(k, Y)];
        g[at2(i, V)] = s[at2(k, X)] - s[at2(j, X)];
    }
    return g;
}

}  // namespace

double area_rate_2d(const Vector& s) {
    check_size(s, kDim2);
    return area_rate_gradient_2d(s).dot(s);
}

Multiplier multiplier_2d(const Vector& s) {
    check_size(s, kDim2);
    const double x1 = s[at2(0, X)], y1 = s[at2(0, Y)], u1 = s[at2(0, U)], v1 = s[at2(0, V)];
    const double x2 = s[at2(1, X)], y2 = s[at2(1, Y)], u2 = s[at2(1, U)], v2 = s[at2(1, V)];
    const double x3 = s[at2(2, X)], y3 = s[at2(2, Y)], u3 = s[at2(2, U)], v3 = s[at2(2, V)];
    const double num = u1 * v2 - u1 * v3 - u2 * v1 + u2 * v3 + u3 * v1 - u3 * v2;
    const double den = -x1 * x1 + x1 * x2 + x1 * x3 - x2 * x2 + x2 * x3 - x3 * x3 - y1 * y1 +
                       y1 * y2 + y1 * y3 - y2 * y2 + y2 * y3 - y3 * y3;
    return {num, den};
}

Vector field_2d(const Vector& s, double threshold) {
    const auto [num, den] = multiplier_2d(s);
    if (std::abs(den) <= threshold) {
        throw DegenerateConfigurationError("2D fluid element is degenerate (|denominator| = " +
                                           std::to_string(std::abs(den)) + ")");
    }
    const double lambda = num / den;
    Vector f(kDim2);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const int k = (i + 2) % 3;
        f[at2(i, X)] = s[at2(i, U)];
        f[at2(i, Y)] = s[at2(i, V)];
        f[at2(i, U)] = lambda * (s[at2(j, Y)] - s[at2(k, Y)]);
        f[at2(i, V)] = lambda * (s[at2(k, X)] - s[at2(j, X)]);
    }
    return f;
}

Vector project_incompressible_2d(const Vector& s) {
    check_size(s, kDim2);
    const Vector g = area_rate_gradient_2d(s);
    const double gg = g.squaredNorm();
    if (gg <= kDegenerateThreshold) {
        throw DegenerateConfigurationError("cannot project velocities of a collapsed triangle");
    }
    return s - (g.dot(s) / gg) * g;
}

Eigen::Matrix<double, 4, 3> face_areas_3d(const Vector& s) {
    check_size(s, kDim3);
    return face_vectors(s, PX, PY, PZ);
}

Eigen::Matrix<double, 4, 3> velocity_face_areas_3d(const Vector& s) {
    check_size(s, kDim3);
    return face_vectors(s, VU, VV, VW);
}

namespace {

Eigen::Matrix<double, 4, 3> block(const Vector& s, int offset) {
    Eigen::Matrix<double, 4, 3> out;
    for (int i = 0; i < 4; ++i) {
        for (int c = 0; c < 3; ++c) {
            out(i, c) = s[at3(i, offset + c)];
        }
    }
    return out;
}

}  // namespace

double volume_3d(const Vector& s) {
    const auto a = face_areas_3d(s);
    return a.cwiseProduct(block(s, PX)).sum() / 3.0;
}

double volume_rate_3d(const Vector& s) {
    const auto a = face_areas_3d(s);
    return a.cwiseProduct(block(s, VU)).sum();
}

Multiplier multiplier_3d(const Vector& s) {
    const auto a = face_areas_3d(s);
    const auto b = velocity_face_areas_3d(s);
    return {b.cwiseProduct(block(s, PX)).sum(), a.squaredNorm()};
}

Vector field_3d(const Vector& s, double threshold) {
    const auto [p, q] = multiplier_3d(s);
    if (q <= threshold) {
        throw DegenerateConfigurationError("3D fluid element is degenerate (q = " +
                                           std::to_string(q) + ")");
    }
    const double lambda = -2.0 * p / q;
    const auto a = face_areas_3d(s);
    Vector f(kDim3);
    for (int i = 0; i < 4; ++i) {
        for (int c = 0; c < 3; ++c) {
            f[at3(i, PX + c)] = s[at3(i, VU + c)];
            f[at3(i, VU + c)] = lambda * a(i, c);
        }
    }
    return f;
}

Vector project_incompressible_3d(const Vector& s) {
    const auto a = face_areas_3d(s);
    const double q = a.squaredNorm();
    if (q <= kDegenerateThreshold) {
        throw DegenerateConfigurationError("cannot project velocities of a collapsed tetrahedron");
    }
    const double rate = a.cwiseProduct(block(s, VU)).sum();
    Vector out = s;
    for (int i = 0; i < 4; ++i) {
        for (int c = 0; c < 3; ++c) {
            out[at3(i, VU + c)] -= rate / q * a(i, c);
        }
    }
    return out;
}

// ---- reference quantities as polynomials ------------------------------------

std::vector<NamedPolynomial> quantities_2d() {
    auto var = [](int vertex, int comp) { return Polynomial::variable(kDim2, at2(vertex, comp)); };
    auto mean = [&](int comp) {
        return (var(0, comp) + var(1, comp) + var(2, comp)) * (1.0 / 3.0);
    };
    const Polynomial xc = mean(X), yc = mean(Y), uc = mean(U), vc = mean(V);
    auto bar = [&](int vertex, int comp, const Polynomial& c) { return var(vertex, comp) - c; };

    Polynomial l(kDim2), e(kDim2), inertia(kDim2), g(kDim2), j(kDim2);
    for (int i = 0; i < 3; ++i) {
        const auto xb = bar(i, X, xc), yb = bar(i, Y, yc), ub = bar(i, U, uc), vb = bar(i, V, vc);
        l += vb * xb - ub * yb;
        e += ub * ub + vb * vb;
        inertia += xb * xb + yb * yb;
        g += ub * xb + vb * yb;
        const int n = (i + 1) % 3;
        const auto dx = var(i, X) - var(n, X);
        const auto dy = var(i, Y) - var(n, Y);
        j += dx * dx + dy * dy;
    }

    // Cyclic sums over (i, i+1, i+2).
    Polynomial area(kDim2), k(kDim2), d(kDim2), omega(kDim2);
    for (int i = 0; i < 3; ++i) {
        const int a = (i + 1) % 3;
        const int b = (i + 2) % 3;
        area += var(i, X) * (var(a, Y) - var(b, Y));
        k += var(i, U) * (var(a, V) - var(b, V));
        d += var(i, U) * (var(a, Y) - var(b, Y)) + var(i, V) * (var(b, X) - var(a, X));
        omega += var(i, U) * (var(a, X) - var(b, X)) + var(i, V) * (var(a, Y) - var(b, Y));
    }

    return {
        {"u_cm", uc},   {"v_cm", vc},       {"L_cm", xc * vc - yc * uc},
        {"L", l},       {"E", e},           {"A", area},
        {"D", d},       {"omega", omega},   {"I", inertia},
        {"K", k},       {"G", g},           {"J", j},
    };
}

std::vector<NamedPolynomial> quantities_3d() {
    auto var = [](int vertex, int comp) { return Polynomial::variable(kDim3, at3(vertex, comp)); };
    auto mean = [&](int comp) {
        return (var(0, comp) + var(1, comp) + var(2, comp) + var(3, comp)) * 0.25;
    };
    const std::array<Polynomial, 3> rc{mean(PX), mean(PY), mean(PZ)};
    const std::array<Polynomial, 3> vcm{mean(VU), mean(VV), mean(VW)};

    // Polynomial versions of `triple` and `face_vectors`.
    auto triple_poly = [&](int a, int b, const std::array<int, 3>& v) {
        return var(v[0], a) * (var(v[1], b) - var(v[2], b)) -
               var(v[1], a) * (var(v[0], b) - var(v[2], b)) +
               var(v[2], a) * (var(v[0], b) - var(v[1], b));
    };
    std::vector<std::array<Polynomial, 3>> faces;
    for (int i = 0; i < 4; ++i) {
        const auto o = others(i);
        const double sign = (i % 2 == 0) ? -1.0 : 1.0;
        faces.push_back({sign * triple_poly(PY, PZ, o), -sign * triple_poly(PX, PZ, o),
                         sign * triple_poly(PX, PY, o)});
    }

    Polynomial e(kDim3), vol(kDim3), d(kDim3);
    std::array<Polynomial, 3> lcom{Polynomial(kDim3), Polynomial(kDim3), Polynomial(kDim3)};
    for (int i = 0; i < 4; ++i) {
        std::array<Polynomial, 3> rb{var(i, PX) - rc[0], var(i, PY) - rc[1], var(i, PZ) - rc[2]};
        std::array<Polynomial, 3> ub{var(i, VU) - vcm[0], var(i, VV) - vcm[1],
                                     var(i, VW) - vcm[2]};
        for (int c = 0; c < 3; ++c) {
            e += ub[c] * ub[c];
            vol += var(i, PX + c) * faces[static_cast<std::size_t>(i)][c] * (1.0 / 3.0);
            d += var(i, VU + c) * faces[static_cast<std::size_t>(i)][c];
        }
        lcom[0] += ub[2] * rb[1] - ub[1] * rb[2];
        lcom[1] += ub[0] * rb[2] - ub[2] * rb[0];
        lcom[2] += ub[1] * rb[0] - ub[0] * rb[1];
    }

    std::vector<NamedPolynomial> out{
        {"u_cm", vcm[0]},
        {"v_cm", vcm[1]},
        {"w_cm", vcm[2]},
        {"Lcm_x", vcm[2] * rc[1] - vcm[1] * rc[2]},
        {"Lcm_y", vcm[0] * rc[2] - vcm[2] * rc[0]},
        {"Lcm_z", vcm[1] * rc[0] - vcm[0] * rc[1]},
        {"L_x", lcom[0]},
        {"L_y", lcom[1]},
        {"L_z", lcom[2]},
        {"E", e},
        {"V", vol},
        {"D", d},
    };
    // Circulations: C_i = -sign_i * sum over (u,x), (v,y), (w,z) of the triple
    // product on the other three vertices.
    for (int i = 0; i < 4; ++i) {
        const auto o = others(i);
        const double sign = (i % 2 == 0) ? -1.0 : 1.0;
        Polynomial c(kDim3);
        for (int comp = 0; comp < 3; ++comp) {
            c += triple_poly(VU + comp, PX + comp, o);
        }
        out.push_back({"C" + std::to_string(i + 1), -sign * c});
    }
    return out;
}

}  // namespace sid::fluid
