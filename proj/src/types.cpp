#include "nearmiss/types.hpp"

namespace nearmiss {

double wrap_angle(double theta_deg) {
    if (!std::isfinite(theta_deg))
        throw std::domain_error("wrap_angle: non-finite angle");
    double a = std::fmod(theta_deg, 360.0);
    if (a <= -180.0) a += 360.0;
    else if (a > 180.0) a -= 360.0;
    return a;
}

const char* termination_name(TerminationReason r) {
    switch (r) {
        case TerminationReason::none: return "none";
        case TerminationReason::collision: return "collision";
        case TerminationReason::off_road: return "off_road";
        case TerminationReason::road_end: return "road_end";
        case TerminationReason::horizon: return "horizon";
    }
    return "none";
}

TerminationReason termination_from_name(const std::string& s) {
    if (s == "collision") return TerminationReason::collision;
    if (s == "off_road") return TerminationReason::off_road;
    if (s == "road_end") return TerminationReason::road_end;
    if (s == "horizon") return TerminationReason::horizon;
    if (s == "none") return TerminationReason::none;
    throw std::invalid_argument("unknown termination reason: " + s);
}

} // namespace nearmiss
