#ifndef NETREC_LINE_SEARCH_HPP
#define NETREC_LINE_SEARCH_HPP

#include <cmath>
#include <utility>

namespace netrec {

struct LineSearchResult {
    double x;
    double f;
    bool bracket_failed = false;
};

/// Golden-section maximization of a unimodal f on [lo, hi], terminating when
/// the interval shrinks below tol. Returns the best point actually evaluated
/// (endpoints included), which also handles flat plateaus.
template <class F>
LineSearchResult golden_max(F&& f, double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double best_x = lo, best_f = f(lo);
    {
        const double fh = f(hi);
        if (fh > best_f) {
            best_x = hi;
            best_f = fh;
        }
    }
    double c = hi - (hi - lo) * invphi;
    double d = lo + (hi - lo) * invphi;
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * invphi;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * invphi;
            fd = f(d);
        }
        if (fc > best_f) {
            best_f = fc;
            best_x = c;
        }
        if (fd > best_f) {
            best_f = fd;
            best_x = d;
        }
    }
    return {best_x, best_f, false};
}

/// Maximizes unimodal f over the ray from 0 in direction dir (+1 or -1) by
/// doubling the bracket endpoint from 1 until f stops improving, then running
/// golden_max on the bracketed interval. max_doublings caps the expansion;
/// hitting the cap is reported as a bracketing failure (best point still
/// returned, never silent).
template <class F>
LineSearchResult expand_and_golden_max(F&& f, double dir, double tol,
                                       int max_doublings = 64) {
    double b = 1.0;
    double f_prev = f(0.0);
    double f_b = f(dir * b);
    bool failed = false;
    int steps = 0;
    while (f_b > f_prev) {
        if (++steps > max_doublings) {
            failed = true;
            break;
        }
        f_prev = f_b;
        b *= 2.0;
        f_b = f(dir * b);
    }
    LineSearchResult r = dir > 0 ? golden_max(f, 0.0, b, tol) : golden_max(f, -b, 0.0, tol);
    r.bracket_failed = failed;
    return r;
}

}  // namespace netrec

#endif
