#include "loblab/eval.hpp"

#include <cmath>
#include <functional>
#include <optional>

#include <fmt/format.h>

#include "loblab/bessel.hpp"

namespace loblab {

namespace {

struct Input {
    std::string name;
    // Unset: required. Defaults may depend on the model constants.
    std::function<std::optional<double>(const DerivedConstants&)> fallback;
};

using Args = std::map<std::string, double>;
using Body = std::function<void(const Args&, const DerivedConstants&, const QuadratureConfig&, EvalResult&)>;

struct Quantity {
    std::vector<Input> inputs;
    Body body;
};

Input required(std::string name) {
    return {std::move(name), [](const DerivedConstants&) { return std::optional<double>(); }};
}

Input with_default(std::string name, double v) {
    return {std::move(name), [v](const DerivedConstants&) { return std::optional<double>(v); }};
}

Input start_v1() {
    return {"v1", [](const DerivedConstants& dc) { return std::optional<double>(dc.kappa_L); }};
}

Input start_x1() {
    return {"x1", [](const DerivedConstants& dc) { return std::optional<double>(dc.kappa_R); }};
}

void put(EvalResult& out, const SeriesResult& r) {
    out.value = {r.value};
    out.error_estimate = r.error;
    out.flags = r.flags;
}

void put_complex(std::vector<double>& dst, std::complex<double> z) {
    dst.push_back(z.real());
    dst.push_back(z.imag());
}

QuadrantParams quadrant(const Args& a, const DerivedConstants& dc) {
    return make_quadrant_params(a.at("v1"), a.at("x1"), dc);
}

const std::map<std::string, Quantity>& registry() {
    static const std::map<std::string, Quantity> m{
        {"half_stable_identity",
         {{required("alpha")},
          [](const Args& a, const DerivedConstants&, const QuadratureConfig&, EvalResult& out) {
              const auto r = half_stable_identity(a.at("alpha"));
              put_complex(out.value, r.numeric);
              put_complex(out.reference, r.closed_form);
              out.error_estimate = r.error;
          }}},
        {"exit_probs",
         {{start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig&, EvalResult& out) {
              const auto e = exit_probs(quadrant(a, dc));
              out.value = {e.d_first, e.e_first};
          }}},
        {"metzler_density",
         {{required("s"), required("t"), start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, metzler_density(a.at("s"), a.at("t"), quadrant(a, dc), q));
          }}},
        {"metzler_mass",
         {{start_v1(), start_x1(), with_default("d_first", 1.0)},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              const auto qp = quadrant(a, dc);
              const bool d = a.at("d_first") != 0.0;
              put(out, metzler_mass(qp, d, q));
              const auto e = exit_probs(qp);
              out.reference = {d ? e.d_first : e.e_first};
          }}},
        {"fpt_density_d",
         {{required("s"), start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, conditional_fpt_density_D(a.at("s"), quadrant(a, dc), q));
          }}},
        {"fpt_density_e",
         {{required("t"), start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, conditional_fpt_density_E(a.at("t"), quadrant(a, dc), q));
          }}},
        {"fpt_cdf_d",
         {{required("s"), start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              out.value = {conditional_fpt_cdf_D(quadrant(a, dc), q)(a.at("s"))};
          }}},
        {"fpt_cdf_e",
         {{required("t"), start_v1(), start_x1()},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              out.value = {conditional_fpt_cdf_E(quadrant(a, dc), q)(a.at("t"))};
          }}},
        {"p_vstar_density",
         {{required("s"), with_default("ell", 1.0)},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, p_vstar_density(a.at("s"), a.at("ell"), dc, q));
          }}},
        {"p_ystar_density",
         {{required("s"), with_default("ell", 1.0)},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, p_ystar_density(a.at("s"), a.at("ell"), dc, q));
          }}},
        {"p_vstar_total",
         {{with_default("ell", 1.0)},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, p_vstar_total(a.at("ell"), dc, q));
          }}},
        {"p_ystar_total",
         {{with_default("ell", 1.0)},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, p_ystar_total(a.at("ell"), dc, q));
          }}},
        {"renewal_intensities",
         {{},
          [](const Args&, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              const auto r = renewal_intensities(dc, q);
              out.value = {r.lambda_minus, r.lambda_plus};
              out.error_estimate = std::max(r.error_minus, r.error_plus);
              out.flags = r.flags;
          }}},
        {"down_prob",
         {{},
          [](const Args&, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              put(out, renewal_down_prob(dc, q));
          }}},
        {"renewal_cf",
         {{required("alpha")},
          [](const Args& a, const DerivedConstants& dc, const QuadratureConfig& q, EvalResult& out) {
              const auto cf = renewal_cf(a.at("alpha"), dc, q);
              // all, then the down and up parts
              put_complex(out.value, cf.all);
              put_complex(out.value, cf.down);
              put_complex(out.value, cf.up);
              out.error_estimate = cf.error;
              out.flags = cf.flags;
          }}},
        {"kernel_K",
         {{required("t"), required("x")},
          [](const Args& a, const DerivedConstants&, const QuadratureConfig&, EvalResult& out) {
              out.value = {kernel_K(a.at("t"), a.at("x"))};
          }}},
        {"kernel_p0",
         {{required("t"), required("x"), required("y")},
          [](const Args& a, const DerivedConstants&, const QuadratureConfig&, EvalResult& out) {
              out.value = {kernel_p0(a.at("t"), a.at("x"), a.at("y"))};
          }}},
        {"kernel_h",
         {{required("ell"), required("s"), required("a"), required("t"), required("b")},
          [](const Args& a, const DerivedConstants&, const QuadratureConfig&, EvalResult& out) {
              out.value = {kernel_h(a.at("ell"), a.at("s"), a.at("a"), a.at("t"), a.at("b"))};
          }}},
        {"bessel_i",
         {{required("nu"), required("z")},
          [](const Args& a, const DerivedConstants&, const QuadratureConfig&, EvalResult& out) {
              out.value = {bessel_i(a.at("nu"), a.at("z"))};
          }}},
    };
    return m;
}

}  // namespace

std::vector<std::string> eval_quantities() {
    std::vector<std::string> out;
    for (const auto& [name, q] : registry()) out.push_back(name);
    return out;
}

EvalResult evaluate(const std::string& quantity, const std::map<std::string, double>& inputs,
                    const DerivedConstants& dc, const QuadratureConfig& cfg) {
    const auto it = registry().find(quantity);
    if (it == registry().end()) throw UnknownQuantity(fmt::format("unknown quantity '{}'", quantity));
    const Quantity& q = it->second;
    EvalResult out;
    out.quantity = quantity;
    for (const auto& [name, v] : inputs) {
        bool known = false;
        for (const auto& in : q.inputs) known = known || in.name == name;
        if (!known) throw std::invalid_argument(fmt::format("quantity '{}' takes no input '{}'", quantity, name));
        out.inputs[name] = v;
    }
    for (const auto& in : q.inputs) {
        if (out.inputs.count(in.name)) continue;
        const auto v = in.fallback(dc);
        if (!v) throw std::invalid_argument(fmt::format("quantity '{}' needs input '{}'", quantity, in.name));
        out.inputs[in.name] = *v;
    }
    q.body(out.inputs, dc, cfg, out);
    return out;
}

}  // namespace loblab
