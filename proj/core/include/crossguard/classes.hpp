#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crossguard {

inline constexpr std::string_view kBackgroundLabel = "background";
inline constexpr std::string_view kTrainLabel = "train";
inline constexpr std::string_view kEnsembleSource = "ensemble";
inline constexpr std::string_view kGroundTruthSource = "gt";

/// Ordered set of object class labels. The order fixes confusion-matrix
/// rows and report ordering. `background` is reserved and can never be
/// registered.
class ClassRegistry {
 public:
  /// car, bus, truck, person, train.
  static const ClassRegistry& standard();

  ClassRegistry() = default;
  explicit ClassRegistry(std::vector<std::string> labels);

  /// Appends a label; no-op if already present. Throws on the reserved
  /// `background` label or on tokens containing whitespace.
  void add(std::string_view label);

  bool contains(std::string_view label) const noexcept;
  std::span<const std::string> labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
};

/// True for a non-empty token without whitespace.
bool is_token(std::string_view s) noexcept;

}  // namespace crossguard
