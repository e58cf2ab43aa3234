#pragma once

#include <string>

#include "dstc/crypto.hpp"

namespace dstc::testing {

// RSA generation dominates test time, so keys are shared per process.
inline const ZoneKeyPair& key_a() {
  static const ZoneKeyPair k = ZoneKeyPair::generate("zsk-a");
  return k;
}

inline const ZoneKeyPair& key_b() {
  static const ZoneKeyPair k = ZoneKeyPair::generate("zsk-b");
  return k;
}

}  // namespace dstc::testing
