#pragma once

#include "loopsoup/conformal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace loopsoup {

enum class CurveKind { Path, Bridge, Excursion, Bubble, Loop, Trace };

const char* to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& name);

// Sampled path: times strictly increasing from 0, one point per time.
class Curve {
public:
    Curve(std::vector<double> times, std::vector<Complex> points, CurveKind kind = CurveKind::Path);

    const std::vector<double>& times() const { return times_; }
    const std::vector<Complex>& points() const { return points_; }
    std::size_t size() const { return times_.size(); }
    double duration() const { return times_.back(); }
    Complex front() const { return points_.front(); }
    Complex back() const { return points_.back(); }
    CurveKind kind() const { return kind_; }
    void set_kind(CurveKind kind) { kind_ = kind; }
    bool closed() const { return points_.front() == points_.back(); }

    bool operator==(const Curve& o) const {
        return times_ == o.times_ && points_ == o.points_ && kind_ == o.kind_;
    }

private:
    std::vector<double> times_;
    std::vector<Complex> points_;
    CurveKind kind_;
};

class Loop {
public:
    explicit Loop(Curve c);
    const Curve& curve() const { return curve_; }
    std::size_t size() const { return curve_.size(); }
    double duration() const { return curve_.duration(); }
    Complex root() const { return curve_.front(); }
    const std::vector<double>& times() const { return curve_.times(); }
    const std::vector<Complex>& points() const { return curve_.points(); }
    bool operator==(const Loop& o) const { return curve_ == o.curve_; }

private:
    Curve curve_;
};

// Stored through the representative rooted at the sample of least imaginary
// part, ties going to the smallest index.
class UnrootedLoop {
public:
    explicit UnrootedLoop(const Loop& l);
    const Loop& canonical() const { return rep_; }
    double duration() const { return rep_.duration(); }
    bool operator==(const UnrootedLoop& o) const { return rep_ == o.rep_; }

private:
    Loop rep_;
};

Curve concat(const Curve& a, const Curve& b);
Curve reverse(const Curve& c);

// Image f o c with the Brownian clock s(t) = int |f'(c)|^2, integrated by the
// trapezoid rule. An endpoint where f' blows up (a slit tip mapped to the
// boundary) is integrated assuming |f'|^2 ~ 1/|z - endpoint| along a path
// leaving like sqrt(s); any other non-finite derivative is NonIntegrable.
Curve conformal_image(const ConformalMap& m, const Curve& c);

// Discrete Frechet distance with cost |t_i - u_j| + |a_i - b_j| over monotone
// couplings of the two sample grids.
double curve_distance(const Curve& a, const Curve& b);
double unrooted_distance(const UnrootedLoop& a, const UnrootedLoop& b);

// Loop rerooted at sample k (0 <= k < size - 1).
Loop shift_loop(const Loop& l, std::size_t k);

enum class RootRule { LowestImag, MaxAbs };
Loop reroot(const Loop& l, RootRule rule);
Loop reroot_at(const Loop& l, Complex p, double delta_hit);
std::size_t lowest_imag_index(const Curve& c);
std::size_t max_abs_index(const Curve& c);

double radius(const Curve& c);

struct Hull {
    double h;
    double x0, y0; // lower-left corner of cell (0, 0)
    int nx, ny;
    std::vector<std::uint8_t> cells; // row-major, 1 = in hull

    bool at(int i, int j) const { return cells[std::size_t(j) * nx + i] != 0; }
    bool contains(Complex z) const;
    double area() const;
};

Hull fill_hull(const Loop& l, double h);

} // namespace loopsoup
