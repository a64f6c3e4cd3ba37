"""reasim: a desk-scale reactive safe-navigation laboratory.

Subpackages:
    core        kinematic world model, obstacle behaviors, collision checks
    raycast     2D/3D ray casting, spherical depth images, frame history
    guidance    occupancy grids, Dijkstra guidance fields, scenario generators
    rewards     reward and penalty kernels, time-to-collision
    nn          minimal reverse-mode tensor math and layers
    estimator   ray estimator network, conservative loss, supervised training
    rl          PPO, observation assembly, shield/nav/end2end training
    evaluation  evaluation batteries and reports
    cli         command line entry points and the live session service
"""

__version__ = "0.1.0"
