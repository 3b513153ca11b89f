#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rxgov {

enum class Role : uint8_t {
    Doctor = 1,
    Patient = 2,
    Pharmacy = 3,
    Regulator = 4,
};

inline std::string role_name(Role r) {
    switch (r) {
        case Role::Doctor: return "doctor";
        case Role::Patient: return "patient";
        case Role::Pharmacy: return "pharmacy";
        case Role::Regulator: return "regulator";
    }
    throw std::invalid_argument("bad role value");
}

inline Role role_from_name(std::string_view s) {
    if (s == "doctor") return Role::Doctor;
    if (s == "patient") return Role::Patient;
    if (s == "pharmacy") return Role::Pharmacy;
    if (s == "regulator") return Role::Regulator;
    throw std::invalid_argument("unknown role: " + std::string(s));
}

inline Role role_from_u8(uint8_t v) {
    if (v < 1 || v > 4) throw std::invalid_argument("bad role value");
    return static_cast<Role>(v);
}

}  // namespace rxgov
