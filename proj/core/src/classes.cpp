#include "crossguard/classes.hpp"

#include <algorithm>
#include <cctype>

#include "crossguard/error.hpp"

namespace crossguard {

const ClassRegistry& ClassRegistry::standard() {
  static const ClassRegistry registry(
      {"car", "bus", "truck", "person", std::string(kTrainLabel)});
  return registry;
}

ClassRegistry::ClassRegistry(std::vector<std::string> labels) {
  for (const auto& l : labels) add(l);
}

void ClassRegistry::add(std::string_view label) {
  if (!is_token(label)) {
    throw Error("class label must be a non-empty token: '" +
                std::string(label) + "'");
  }
  if (label == kBackgroundLabel) {
    throw Error("'background' is reserved and cannot be registered");
  }
  if (!contains(label)) labels_.emplace_back(label);
}

bool ClassRegistry::contains(std::string_view label) const noexcept {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

bool is_token(std::string_view s) noexcept {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

}  // namespace crossguard
