#include "nave/label_map.hpp"

#include "nave/error.hpp"

namespace nave {

void ExplanationMap::validate() const {
  if (height == 0 || width == 0) throw ArgumentError("explanation map: empty map");
  if (labels.size() != height * width) throw ArgumentError("explanation map: label count mismatch");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) {
      throw ArgumentError("explanation map '" + image_id + "': label " + std::to_string(l) +
                          " outside [0, " + std::to_string(k) + ")");
    }
  }
}

}  // namespace nave
