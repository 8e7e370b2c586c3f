#include "calorie/activity.hpp"

#include <string>

#include "calorie/error.hpp"

namespace calorie {

bool valid_activity(int id) { return id >= 0 && id < kActivityCount; }

const ActivityInfo& activity(int id) {
  if (!valid_activity(id)) throw Error("unknown activity id " + std::to_string(id));
  return kActivities[static_cast<std::size_t>(id)];
}

int activity_id(std::string_view name) {
  for (const ActivityInfo& a : kActivities)
    if (a.name == name) return a.id;
  throw Error("unknown activity '" + std::string(name) + "'");
}

double met_rate(double weight_kg, double met) { return kKcalPerKgMin * weight_kg * met; }

}  // namespace calorie
