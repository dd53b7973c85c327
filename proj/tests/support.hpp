#pragma once

#include <memory>

#include "platesim/assembly.hpp"
#include "platesim/mesh.hpp"
#include "platesim/nep.hpp"

namespace platesim::fixtures {

inline PlateProblem example1_problem() {
    PlateProblem p;
    p.oscillators = {{0.01, 100.0, {9.0 / 26.0, 19.0 / 26.0}}};
    return p;
}

inline PlateProblem example2_problem() {
    PlateProblem p;
    p.oscillators = {{0.01, 20.0, {0.5, 0.5}}};
    return p;
}

inline PlateProblem example3_problem() {
    PlateProblem p;
    p.oscillators = {{0.01, 20.0, {0.4, 0.2}}, {0.01, 40.0, {0.8, 0.8}}};
    return p;
}

// Mesh, numbering, matrices and operator function kept together so references stay valid.
struct Fixture {
    RectMesh mesh;
    DofMap dofs;
    AssembledSystem system;
    std::unique_ptr<OperatorFunction> f;

    Fixture(const PlateDomain& domain, double h, const PlateProblem& problem)
        : mesh(build_mesh(domain, h, problem.oscillator_points())),
          dofs(mesh),
          system(assemble(mesh, problem, dofs)),
          f(std::make_unique<OperatorFunction>(system)) {}
};

inline std::unique_ptr<Fixture> example1(double h = 0.2) {
    return std::make_unique<Fixture>(PlateDomain::unit_square(), h, example1_problem());
}

inline std::unique_ptr<Fixture> example3(double h = 0.2) {
    return std::make_unique<Fixture>(PlateDomain::unit_square(), h, example3_problem());
}

}  // namespace platesim::fixtures
