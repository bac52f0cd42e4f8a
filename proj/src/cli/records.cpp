#include "nucav/records.hpp"

#include "nucav/error.hpp"

namespace nucav {

json to_json(const CavityParams& p) {
    return {{"cladding", p.cladding},   {"d1_nm", p.d1_nm},           {"d2_nm", p.d2_nm},
            {"d3_nm", p.d3_nm},         {"theta_in_rad", p.theta_in}, {"theta_in_mrad", p.theta_in * 1e3},
            {"z_focus_nm", p.z_focus_nm}};
}

CavityParams params_from_json(const json& j) {
    return {j.at("cladding").get<std::string>(), j.at("d1_nm").get<double>(), j.at("d2_nm").get<double>(),
            j.at("d3_nm").get<double>(),         j.at("theta_in_rad").get<double>(), j.at("z_focus_nm").get<double>()};
}

json to_json(const CavityTemplate& t) {
    return {{"claddings", t.claddings},
            {"guide", t.guide},
            {"resonant", t.resonant},
            {"resonant_thickness_nm", t.resonant_thickness_nm},
            {"thickness_bounds_nm", {t.thickness_nm.lo, t.thickness_nm.hi}},
            {"theta_bounds_critical_angle_factors", {t.theta_lo_factor, t.theta_hi_factor}},
            {"focus_above_nm", t.focus_above_nm},
            {"structure", "vacuum / cladding(d1) / guide(d2) / resonant / guide(d3) / cladding(inf)"}};
}

CavityTemplate template_from_json(const json& j) {
    CavityTemplate t;
    t.claddings = j.at("claddings").get<std::vector<std::string>>();
    t.guide = j.at("guide").get<std::string>();
    t.resonant = j.at("resonant").get<std::string>();
    t.resonant_thickness_nm = j.at("resonant_thickness_nm").get<double>();
    const auto& tb = j.at("thickness_bounds_nm");
    t.thickness_nm = {tb.at(0).get<double>(), tb.at(1).get<double>()};
    const auto& ab = j.at("theta_bounds_critical_angle_factors");
    t.theta_lo_factor = ab.at(0).get<double>();
    t.theta_hi_factor = ab.at(1).get<double>();
    t.focus_above_nm = j.at("focus_above_nm").get<double>();
    t.validate();
    return t;
}

json to_json(const AnnealOptions& a) {
    return {{"method", "generalized simulated annealing + Nelder-Mead polish"},
            {"visiting_qv", a.visiting},
            {"acceptance_qa", a.acceptance},
            {"initial_temperature", a.initial_temperature},
            {"final_temperature", a.final_temperature},
            {"schedule", "geometric, calibrated to the remaining budget; restart on stagnation"},
            {"init_samples", a.init_samples},
            {"stagnation_fraction", a.stagnation_fraction},
            {"polish_fraction", a.polish_fraction}};
}

json to_json(const FieldOptions& f) {
    return {{"n_angles", f.n_angles},
            {"cutoff_sigmas", f.cutoff_sigmas},
            {"horizon", f.horizon == HorizonPolicy::clip ? "clip" : "reject"}};
}

json to_json(const OptimizationResult& r, const MaterialsDb& db) {
    const auto& iso = db.isotope(r.isotope);
    json bounds = json::object();
    for (const auto& c : r.tpl.claddings) {
        const auto box = search_box(r.tpl, db, iso, c);
        bounds[c] = {{"d_nm", {box.lower[0], box.upper[0]}},
                     {"theta_in_mrad", {box.lower[3] * 1e3, box.upper[3] * 1e3}},
                     {"z_focus_nm", {-r.tpl.focus_above_nm, "total depth"}}};
    }
    json runs = json::array();
    for (const auto& run : r.runs) {
        json trace = json::array();
        for (const auto& t : run.trace) trace.push_back({t.evaluation, t.best});
        runs.push_back({{"cladding", run.cladding},
                        {"best_params", to_json(run.best)},
                        {"best_xi", run.best_xi},
                        {"best_initial_xi", run.best_initial_xi},
                        {"evaluations", run.evaluations},
                        {"restarts", run.restarts},
                        {"seed", run.seed},
                        {"trace", trace}});
    }
    json trace = json::array();
    for (const auto& t : r.trace) trace.push_back({t.evaluation, t.best});
    return {{"isotope", r.isotope},
            {"w0_nm", r.w0_nm},
            {"budget", r.budget},
            {"seed", r.seed},
            {"evaluations", r.evaluations},
            {"best_xi", r.best_xi},
            {"best_params", to_json(r.best_params)},
            {"z_focus_reference", "depth below the top surface (z = 0), positive into the cavity"},
            {"objective", r.settings.point == ObjectivePoint::center ? "center" : "layer-average"},
            {"field", to_json(r.settings.field)},
            {"template", to_json(r.tpl)},
            {"bounds", bounds},
            {"annealer", to_json(r.anneal)},
            {"runs", runs},
            {"trace", trace}};
}

OptimizationResult optimization_from_json(const json& j) {
    try {
        OptimizationResult r;
        r.isotope = j.at("isotope").get<std::string>();
        r.w0_nm = j.at("w0_nm").get<double>();
        r.budget = j.at("budget").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.evaluations = j.at("evaluations").get<std::size_t>();
        r.best_xi = j.at("best_xi").get<double>();
        r.best_params = params_from_json(j.at("best_params"));
        r.tpl = template_from_json(j.at("template"));
        r.settings.point = j.at("objective").get<std::string>() == "center" ? ObjectivePoint::center
                                                                             : ObjectivePoint::layer_average;
        const auto& f = j.at("field");
        r.settings.field.n_angles = f.at("n_angles").get<int>();
        r.settings.field.cutoff_sigmas = f.at("cutoff_sigmas").get<double>();
        r.settings.field.horizon = f.at("horizon").get<std::string>() == "clip" ? HorizonPolicy::clip : HorizonPolicy::reject;
        for (const auto& t : j.at("trace")) r.trace.push_back({t.at(0).get<std::size_t>(), t.at(1).get<double>()});
        return r;
    } catch (const json::exception& e) {
        throw ParseError("optimization record", 0, e.what());
    }
}

}  // namespace nucav
