#include <json.hpp>

#include "cp2flow/core.hpp"

namespace cp2flow {

std::string curve_to_json(const ProfileCurve& curve) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& loop : curve.components) {
        nlohmann::json pts = nlohmann::json::array();
        for (auto p : loop)
            pts.push_back({p.real(), p.imag()});
        comps.push_back(std::move(pts));
    }
    return nlohmann::json{{"class", to_string(curve.symmetry_class)}, {"components", std::move(comps)}}.dump();
}

ProfileCurve curve_from_json(const std::string& text) {
    ProfileCurve c;
    std::string cls;
    try {
        const auto j = nlohmann::json::parse(text);
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "class" && it.key() != "components")
                throw Error(ErrorKind::Config, "unknown key '" + it.key() + "' in curve");
        cls = j.at("class").get<std::string>();
        for (const auto& comp : j.at("components")) {
            Polyline loop;
            for (const auto& p : comp) {
                if (p.size() != 2)
                    throw Error(ErrorKind::Config, "curve points must be [x, y] pairs");
                loop.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
            if (loop.size() < 3)
                throw Error(ErrorKind::Config, "curve component needs at least 3 vertices");
            c.components.push_back(std::move(loop));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    if (cls == "clifford")
        c.symmetry_class = SymmetryClass::Clifford;
    else if (cls == "chekanov")
        c.symmetry_class = SymmetryClass::Chekanov;
    else
        throw Error(ErrorKind::Config, "unknown curve class '" + cls + "'");
    if (classify(c) != c.symmetry_class)
        throw Error(ErrorKind::InvalidClass, "declared class " + cls + " does not match the curve");
    return c;
}

}  // namespace cp2flow
