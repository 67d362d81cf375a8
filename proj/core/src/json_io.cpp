#include "stabvote/hypercube.hpp"
#include "stabvote/power.hpp"

#include <json.hpp>

namespace stabvote {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json spec_to_node(const MethodSpec& spec) {
    ordered_json j;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Dictator>) {
                j["type"] = "dictator";
                j["i"] = m.i;
            } else if constexpr (std::is_same_v<T, Majority>) {
                j["type"] = "majority";
            } else if constexpr (std::is_same_v<T, ThresholdMajority>) {
                j["type"] = "threshold-majority";
                j["t"] = m.t;
            } else if constexpr (std::is_same_v<T, WeightedMajority>) {
                j["type"] = "weighted-majority";
                j["w"] = m.w;
                j["t"] = m.t;
            } else if constexpr (std::is_same_v<T, TwoTier>) {
                j["type"] = "two-tier";
                j["states"] = m.states;
                j["inner"] = spec_to_node(*m.inner);
                j["outer"] = spec_to_node(*m.outer);
            } else {
                j["type"] = "un-council";
                j["era"] = m.era == UNEra::Pre1965 ? "pre1965" : "post1965";
            }
        },
        spec.v);
    return j;
}

const ordered_json& require(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw DomainError(std::string("method spec is missing field '") + key + "'");
    return *it;
}

double number_field(const ordered_json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number()) throw DomainError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

MethodSpec spec_from_node(const ordered_json& j) {
    if (!j.is_object()) throw DomainError("method spec must be a JSON object");
    const auto& t = require(j, "type");
    if (!t.is_string()) throw DomainError("field 'type' must be a string");
    std::string type = t.get<std::string>();

    MethodSpec spec;
    if (type == "dictator") {
        const auto& i = require(j, "i");
        if (!i.is_number_integer()) throw DomainError("field 'i' must be an integer");
        spec.v = Dictator{i.get<int>()};
    } else if (type == "majority") {
        spec.v = Majority{};
    } else if (type == "threshold-majority") {
        spec.v = ThresholdMajority{number_field(j, "t")};
    } else if (type == "weighted-majority") {
        const auto& w = require(j, "w");
        if (!w.is_array()) throw DomainError("field 'w' must be an array");
        WeightedMajority wm;
        for (const auto& x : w) {
            if (!x.is_number()) throw DomainError("weights must be numbers");
            wm.w.push_back(x.get<double>());
        }
        wm.t = number_field(j, "t");
        spec.v = std::move(wm);
    } else if (type == "two-tier") {
        const auto& st = require(j, "states");
        if (!st.is_array()) throw DomainError("field 'states' must be an array of arrays");
        TwoTier tt;
        for (const auto& group : st) {
            if (!group.is_array()) throw DomainError("field 'states' must be an array of arrays");
            std::vector<int> ids;
            for (const auto& x : group) {
                if (!x.is_number_integer()) throw DomainError("voter ids must be integers");
                ids.push_back(x.get<int>());
            }
            tt.states.push_back(std::move(ids));
        }
        tt.inner = std::make_shared<MethodSpec>(spec_from_node(require(j, "inner")));
        tt.outer = std::make_shared<MethodSpec>(spec_from_node(require(j, "outer")));
        spec.v = std::move(tt);
    } else if (type == "un-council") {
        const auto& era = require(j, "era");
        if (!era.is_string()) throw DomainError("field 'era' must be a string");
        std::string e = era.get<std::string>();
        if (e == "pre1965")
            spec.v = UNCouncil{UNEra::Pre1965};
        else if (e == "post1965")
            spec.v = UNCouncil{UNEra::Post1965};
        else
            throw DomainError("unknown era: " + e);
    } else {
        throw DomainError("unknown method type: " + type);
    }
    return spec;
}

ordered_json rat_node(const Rat& r) {
    ordered_json j;
    j["num"] = to_decimal(boost::multiprecision::numerator(r));
    j["den"] = to_decimal(boost::multiprecision::denominator(r));
    j["float"] = to_double(r);
    return j;
}

ordered_json scalar_node(const ExactScalar& e) {
    ordered_json j;
    j["value"] = e.value;
    j["exact"] = e.is_exact;
    if (e.is_exact) {
        j["num"] = to_decimal(boost::multiprecision::numerator(e.exact));
        j["den"] = to_decimal(boost::multiprecision::denominator(e.exact));
    }
    return j;
}

} // namespace

std::string method_spec_to_json(const MethodSpec& spec, std::optional<int> n) {
    ordered_json j = spec_to_node(spec);
    if (n) j["n"] = *n;
    return j.dump(2) + "\n";
}

std::pair<MethodSpec, std::optional<int>> method_spec_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DomainError("invalid JSON in method spec");
    MethodSpec spec = spec_from_node(j);
    std::optional<int> n;
    if (auto it = j.find("n"); it != j.end()) {
        if (!it->is_number_integer()) throw DomainError("field 'n' must be an integer");
        n = it->get<int>();
    }
    return {std::move(spec), n};
}

std::string pivotal_report_json(const PivotalReport& rep) {
    ordered_json j;
    j["n"] = rep.n;
    j["p"] = rep.p;
    ordered_json b = ordered_json::array();
    for (const Int& x : rep.b) b.push_back(to_decimal(x));
    j["pivotal"] = std::move(b);
    ordered_json inf = ordered_json::array();
    for (const ExactScalar& e : rep.influence) inf.push_back(scalar_node(e));
    j["influence"] = std::move(inf);
    ordered_json bz = ordered_json::array();
    for (const Rat& r : rep.banzhaf) bz.push_back(rat_node(r));
    j["banzhaf"] = std::move(bz);
    return j.dump(2) + "\n";
}

} // namespace stabvote
