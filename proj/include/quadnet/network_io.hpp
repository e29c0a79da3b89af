#pragma once

#include <string>

#include "quadnet/network.hpp"

namespace quadnet {

inline constexpr int kNetworkFormatVersion = 1;

/// Versioned JSON document with a fixed field order and 17-significant-digit
/// floats, so equal networks always serialize to identical bytes:
///
///   {"format":"quadnet-network","version":1,"layers":[
///     {"kind":"quadratic","activation":"relu","frozen":false,"in":2,"out":3,
///      "w1":[[...],...],"b1":[...],"w2":...,"b2":...,"w3":...,"b3":...}, ...]}
///
/// Conventional layers carry only w1 and b1.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

void save_network(const std::string& path, const Network& net);
Network load_network(const std::string& path);

}  // namespace quadnet
