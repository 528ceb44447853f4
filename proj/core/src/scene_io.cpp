#include "physlink/scene_io.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

namespace physlink {

using nlohmann::json;

namespace {

Vec3 vec3_of(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw SceneIoError(std::string(what) + " must be [x,y,z]");
    return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

Quat quat_of(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 4) throw SceneIoError(std::string(what) + " must be [x,y,z,w]");
    return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>(), j[3].get<float>()};
}

} // namespace

client::LocalScene parse_scene(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SceneIoError(std::string("scene parse failed: ") + e.what());
    }
    if (!root.is_object() || !root.contains("entities") || !root["entities"].is_array())
        throw SceneIoError("scene must be an object with an \"entities\" array");

    client::LocalScene scene;
    std::map<std::string, int> index_of;
    for (const json& je : root["entities"]) {
        client::LocalEntity e;
        if (!je.contains("name") || !je["name"].is_string()) throw SceneIoError("entity missing \"name\"");
        e.name = je["name"].get<std::string>();
        if (index_of.count(e.name)) throw SceneIoError("duplicate entity name '" + e.name + "'");

        if (je.contains("parent") && !je["parent"].is_null()) {
            const auto pname = je["parent"].get<std::string>();
            auto it = index_of.find(pname);
            if (it == index_of.end())
                throw SceneIoError("entity '" + e.name + "' references unknown parent '" + pname + "'");
            e.parent = it->second;
        }
        if (je.contains("position")) e.local.position = vec3_of(je["position"], "position");
        if (je.contains("rotation")) e.local.rotation = normalized(quat_of(je["rotation"], "rotation"));
        if (je.contains("interactable")) e.interactable = je["interactable"].get<bool>();

        if (je.contains("body")) {
            const json& jb = je["body"];
            BodySpec b;
            if (jb.contains("mass")) b.mass = jb["mass"].get<float>();
            if (jb.contains("kinematic")) b.kinematic = jb["kinematic"].get<bool>();
            if (jb.contains("damping")) b.linear_damping = jb["damping"].get<float>();
            if (jb.contains("restitution")) b.restitution = jb["restitution"].get<float>();
            e.body = b;
        }
        if (je.contains("collider")) {
            const json& jc = je["collider"];
            ColliderSpec c;
            if (jc.contains("sphere")) c.shape = SphereShape{jc["sphere"].get<float>()};
            else if (jc.contains("box")) c.shape = BoxShape{vec3_of(jc["box"], "box half-extents")};
            else throw SceneIoError("entity '" + e.name + "' collider needs \"sphere\" or \"box\"");
            if (jc.contains("trigger")) c.trigger = jc["trigger"].get<bool>();
            e.collider = c;
        }
        if (je.contains("springs")) {
            for (const json& js : je["springs"]) {
                client::LocalSpring s;
                const auto oname = js.at("other").get<std::string>();
                auto it = index_of.find(oname);
                if (it == index_of.end())
                    throw SceneIoError("entity '" + e.name + "' spring references unknown entity '" + oname + "'");
                s.other = it->second;
                if (js.contains("rest_length")) s.rest_length = js["rest_length"].get<float>();
                if (js.contains("stiffness")) s.stiffness = js["stiffness"].get<float>();
                if (js.contains("damping")) s.damping = js["damping"].get<float>();
                e.springs.push_back(s);
            }
        }
        index_of[e.name] = static_cast<int>(scene.entities.size());
        scene.entities.push_back(std::move(e));
    }
    return scene;
}

client::LocalScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SceneIoError("cannot open scene file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scene(text);
}

std::string serialize_scene(const client::LocalScene& scene) {
    json entities = json::array();
    for (const client::LocalEntity& e : scene.entities) {
        json je;
        je["name"] = e.name;
        if (e.parent >= 0) je["parent"] = scene.entities[e.parent].name;
        je["position"] = {e.local.position.x, e.local.position.y, e.local.position.z};
        je["rotation"] = {e.local.rotation.x, e.local.rotation.y, e.local.rotation.z, e.local.rotation.w};
        if (e.interactable) je["interactable"] = true;
        if (e.body) {
            je["body"] = {{"mass", e.body->mass},
                          {"kinematic", e.body->kinematic},
                          {"damping", e.body->linear_damping},
                          {"restitution", e.body->restitution}};
        }
        if (e.collider) {
            json jc;
            if (const auto* s = std::get_if<SphereShape>(&e.collider->shape)) {
                jc["sphere"] = s->radius;
            } else {
                const auto& b = std::get<BoxShape>(e.collider->shape);
                jc["box"] = {b.half_extents.x, b.half_extents.y, b.half_extents.z};
            }
            if (e.collider->trigger) jc["trigger"] = true;
            je["collider"] = jc;
        }
        if (!e.springs.empty()) {
            json springs = json::array();
            for (const client::LocalSpring& s : e.springs) {
                springs.push_back({{"other", scene.entities[s.other].name},
                                   {"rest_length", s.rest_length},
                                   {"stiffness", s.stiffness},
                                   {"damping", s.damping}});
            }
            je["springs"] = springs;
        }
        entities.push_back(std::move(je));
    }
    return json{{"entities", std::move(entities)}}.dump(2);
}

void save_scene(const client::LocalScene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SceneIoError("cannot write scene file " + path);
    out << serialize_scene(scene) << "\n";
}

} // namespace physlink
