#pragma once

#include <string>
#include <vector>

namespace cliplab::pipeline::svg {

inline constexpr const char* kTaken = "#2e7d32";
inline constexpr const char* kLeft = "#c62828";
inline constexpr const char* kTakenDark = "#0b3d0f";
inline constexpr const char* kLeftDark = "#5c0a0a";
inline constexpr const char* kNeutral = "#455a64";

struct Marker {
  double x = 0.0;
  double y = 0.0;
  std::string color;
  double radius = 2.5;
  std::string label;
};

struct Arrow {
  double x = 0.0;  // from the origin
  double y = 0.0;
  std::string color;
  std::string label;
};

struct Scatter {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool unit_circle = false;  // fixes the view to [-1.1, 1.1] and draws the circle
  std::vector<Marker> markers;
  std::vector<Arrow> arrows;
  std::vector<std::pair<std::string, std::string>> legend;  // (color, text)
};

std::string scatter(const Scatter& plot);

struct Bar {
  std::string label;
  double value = 0.0;
  std::string color;
};

std::string bars(const std::string& title, const std::string& y_label, const std::vector<Bar>& data);

/// Equal-width bins over the sample range.
std::string histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values,
                      std::size_t bins, const std::string& color);

}  // namespace cliplab::pipeline::svg
