#pragma once

#include <array>
#include <string_view>

namespace calorie {

inline constexpr int kActivityCount = 11;

struct ActivityInfo {
  int id;
  std::string_view name;
  double met;
};

inline constexpr std::array<ActivityInfo, kActivityCount> kActivities{{
    {0, "stand", 1.3},
    {1, "sit", 1.3},
    {2, "walk", 2.0},
    {3, "wipe", 2.3},
    {4, "vacuum", 3.3},
    {5, "sweep", 3.3},
    {6, "lying", 1.3},
    {7, "exercise", 4.0},
    {8, "stretch", 5.0},
    {9, "clean", 3.0},
    {10, "read", 1.5},
}};

/// kcal per kg per minute at MET 1.
inline constexpr double kKcalPerKgMin = 0.0175;

bool valid_activity(int id);
const ActivityInfo& activity(int id);  // throws on unknown id
int activity_id(std::string_view name);  // throws on unknown name

/// 0.0175 * weight * MET, kcal/min.
double met_rate(double weight_kg, double met);

struct Subject {
  int id = 0;
  double weight_kg = 70.0;
  friend bool operator==(const Subject&, const Subject&) = default;
};

}  // namespace calorie
