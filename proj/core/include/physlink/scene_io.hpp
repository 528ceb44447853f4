#pragma once

#include <string>

#include "physlink/client/ghost.hpp"

namespace physlink {

class SceneIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scene description schema (JSON): {"entities": [{
//   "name": str, "parent": str?, "position": [x,y,z]?, "rotation": [x,y,z,w]?,
//   "interactable": bool?,
//   "body": {"mass": f?, "kinematic": bool?, "damping": f?, "restitution": f?}?,
//   "collider": {"sphere": radius | "box": [hx,hy,hz], "trigger": bool?}?,
//   "springs": [{"other": str, "rest_length": f?, "stiffness": f?, "damping": f?}]?
// }]}
// Parents must appear before their children; names are unique.
client::LocalScene parse_scene(const std::string& json_text);
client::LocalScene load_scene(const std::string& path);

std::string serialize_scene(const client::LocalScene& scene);
void save_scene(const client::LocalScene& scene, const std::string& path);

} // namespace physlink
