"""Walk through d-separation on a small everyday graph.

A spark causes fire, fire causes heat and smoke, smoke causes a smell,
and humidity also affects heat. Blocking and opening paths by
conditioning is the entire game: chains and forks close when you hold
the middle fixed, colliders open.

Run: python demos/01_dsep_basics.py
"""

from dagcheck import (
    backdoor_paths,
    enumerate_paths,
    is_d_separated,
    minimal_adjustment_sets,
    parse_dag,
    path_status,
)

dag = parse_dag(
    """
    exposure Fire
    outcome Smoke
    Spark -> Fire
    Spark -> Smoke
    Fire -> Heat
    Fire -> Smoke
    Smoke -> Smell
    Humidity -> Heat
    """
)

print("Paths between Humidity and Smell:")
for path in enumerate_paths(dag, "Humidity", "Smell"):
    open_plain = path_status(dag, path, set()).open
    open_given_fire = path_status(dag, path, {"Fire"}).open
    print(f"  {path}  (open: {open_plain}; given Fire: {open_given_fire})")

print("\nChain: Fire and Smell talk through Smoke...")
print("  Fire _||_ Smell | {}      ->", is_d_separated(dag, {"Fire"}, {"Smell"}, set()))
print("  Fire _||_ Smell | {Smoke} ->", is_d_separated(dag, {"Fire"}, {"Smell"}, {"Smoke"}))

print("\nCollider: Humidity and Fire are unrelated until you look at Heat.")
print("  Humidity _||_ Fire | {}     ->", is_d_separated(dag, {"Humidity"}, {"Fire"}, set()))
print("  Humidity _||_ Fire | {Heat} ->", is_d_separated(dag, {"Humidity"}, {"Fire"}, {"Heat"}))

print("\nBackdoor paths from Fire to Smoke (confounding routes):")
for path in backdoor_paths(dag, "Fire", "Smoke"):
    print(f"  {path}")

search = minimal_adjustment_sets(dag, "Fire", "Smoke")
print("\nMinimal adjustment sets for the Fire -> Smoke effect:",
      [sorted(s) for s in search.sets])
