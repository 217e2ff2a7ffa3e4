#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opetri/petri.hpp"

namespace opetri {

struct JunctionRec {
    std::string name;
};

struct BoxRec {
    std::string name;
    std::vector<int> ports;  // junction index per port
};

/// An undirected wiring diagram: boxes whose ports are wired to junctions,
/// plus outer ports exposing junctions to the environment. Junctions that
/// appear in several boxes are the composition mechanism: the models bound
/// to those boxes get glued along them.
struct UWD {
    std::vector<int> outer_ports;  // junction index per outer port
    std::vector<JunctionRec> junctions;
    std::vector<BoxRec> boxes;

    int port_count() const;
    std::optional<int> junction_index(const std::string& name) const;
};

std::vector<std::string> validate_uwd(const UWD& u);

/// A Petri net with an interface: `legs[i]` is the species exposed through
/// the i-th foot. Feet are singletons here, one exposed place per leg.
struct OpenPetriNet {
    PetriNet net;
    std::vector<int> legs;
};

std::vector<std::string> validate_open_net(const OpenPetriNet& m);

struct OpenTypedPetriNet {
    TypedPetriNet typed;
    std::vector<int> legs;
};

/// Assignment of a concrete open model to each box of a UWD.
using Binding = std::map<std::string, OpenPetriNet>;
using TypedBinding = std::map<std::string, OpenTypedPetriNet>;

struct ComposeError : Error {
    using Error::Error;
};

struct TypeClashError : ComposeError {
    TypeClashError(const std::string& junction, const std::string& type_a,
                   const std::string& type_b)
        : ComposeError("type clash at junction \"" + junction + "\": identified places have types \"" +
                       type_a + "\" and \"" + type_b + "\""),
          junction(junction),
          type_a(type_a),
          type_b(type_b) {}
    std::string junction;
    std::string type_a;
    std::string type_b;
};

/// The union-find quotient of (junctions + all bound elements) induced by
/// the wiring. Shared by Petri net composition and dynamics composition so
/// both produce identical variable orderings and names.
///
/// Classes are ordered by their least member under the global order
/// (junctions in declaration order first, then box elements in box/element
/// order). A class containing a junction is named after its first junction;
/// a class without one is a single unexposed element named "box.element".
struct Quotient {
    int class_count = 0;
    std::vector<int> junction_class;             // junction -> class
    std::vector<std::vector<int>> element_class;  // [box][local element] -> class
    std::vector<std::string> class_names;
    std::vector<std::optional<int>> class_junction;  // first junction of the class, if any
    std::vector<int> outer_classes;                  // outer port -> class
};

Quotient quotient_junctions(const UWD& u, const std::vector<std::vector<int>>& legs_per_box,
                            const std::vector<int>& elements_per_box,
                            const std::vector<std::vector<std::string>>& names_per_box);

/// Glues the bound component nets along the junctions of the UWD.
///
/// The composite is the disjoint union of the components with places
/// identified whenever their legs wire to a common junction. Transitions
/// and arcs are copied (never merged); transition names that occur in more
/// than one component are prefixed with their box name. An unwired junction
/// becomes a fresh isolated place. Composite legs are the outer ports.
OpenPetriNet oapply(const UWD& u, const Binding& binding);

/// Typed variant: all components must be typed into `type_net` (same
/// presentation), places identified at a junction must have the same type,
/// and every junction must be wired to at least one port so its type is
/// determined. The composite carries the induced typing.
OpenTypedPetriNet oapply_typed(const UWD& u, const TypedBinding& binding, const PetriNet& type_net);

}  // namespace opetri
