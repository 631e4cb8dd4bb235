// Generated by tools/oracles/derive.py. Do not edit by hand.
#pragma once

#include <array>

namespace derived {

inline constexpr std::array<double, 3> feeder_load_first{0.377192652076429, 0.4746506014463221, 0.058707140517259004};
inline constexpr std::array<double, 1> feeder_load_total{8.006322274805584};
inline constexpr std::array<double, 1> feeder_unit_setpoint{0.28594008124305653};
inline constexpr std::array<double, 6> sg_coefficients{0.9966666666666667, 1.256637061435917, 0.0016666666666666666, 0.03166666666666666, 0.9966666666666667, 11.938885416974546};
inline constexpr std::array<double, 4> lossy_edge{-2.0, 4.0, 4.47213595499958, -0.4636476090008061};
inline constexpr std::array<double, 9> toy_x0{0.01, -0.02, 0.03, -0.01, 0.05, 377.09111843077517, 0.3, 0.04, 0.02};
inline constexpr std::array<double, 9> toy_step{0.011999186178844587, -0.006200260228354111, 0.021667698288499446, -0.06333327777805554, 0.05166666666666705, 377.0906186085387, 0.29033333333333294, 0.03167523655251319, 0.02833329365099206};
inline constexpr std::array<double, 9> toy_u{0.0019991861788445854, 0.013799739771645888, -0.008332301711500557, -0.05333327777805555, -6.283185307179585, 1.2559705725328065, 11.938885416974546, -0.00832476344748681, 0.008333293650992064};
inline constexpr std::array<double, 9> toy_h_row_norms{0.08498365855987974, 0.2519763153394849, 0.24281045302822787, 0.3333333333333333, 0.0, 0.016666666666666666, 0.0, 0.23809523809523814, 0.2380952380952381};
inline constexpr std::array<double, 12> toy_eps{0.04466351087439402, -0.29552020666133955, 0.04466351087439402, 0.29552020666133955, 0.04466351087439402, 0.29552020666133955, 0.0, 0.0, 0.04466351087439402, 0.29552020666133955, 0.0, 0.0};
inline constexpr std::array<double, 16> toy_ybar{0.01, 0.27999999999999997, 0.03, -0.01, 0.05, 377.09111843077517, 0.04, 0.02, 0.005054551051811222, 0.09325691849468695, 0.015838898641657082, -0.10865068614633405, 6.334851973846252, 375.8346480360059, -0.2308730078348998, 0.019999999999999997};
inline constexpr std::array<double, 9> kf_post_x{0.010118792061962622, -0.019764382340643045, 0.030016510229566373, -0.010428999879002629, 0.050115595589836394, 377.0912110265169, 0.30659962881265473, 0.04001658485845474, 0.02018149978864461};
inline constexpr std::array<double, 1> kf_post_trace{0.010727635984096992};
inline constexpr std::array<double, 5> wl1_x{0.4999999999999999, 0.0, -0.5, -0.5000000000000001, 0.0};
inline constexpr std::array<double, 1> wl1_obj{1.25};

}  // namespace derived
