"""Small bundled instances for tests, demos and the CLI.

Each fixture is an instance JSON document generated from a
:class:`~drayplan.pipeline.SyntheticSpec` listed in :data:`FIXTURE_SPECS`.
Hosting capacity is low enough that scaling it down changes how many
trucks can be electrified.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Dict, List, Union

from ..domain import Instance
from ..io import instance_from_dict, save_instance

_TIGHT = dict(n_trucks=3, n_stations=3, n_substations=2, step_count=8,
              capacity_kw=(40.0, 120.0), max_access_per_truck=3)

FIXTURE_SPECS: Dict[str, dict] = {
    "tight_a": dict(_TIGHT, seed=11),
    "tight_b": dict(_TIGHT, seed=9),
    "tight_c": dict(_TIGHT, seed=3),
}


def list_fixtures() -> List[str]:
    return sorted(FIXTURE_SPECS)


def load_fixture(name: str) -> Instance:
    if name not in FIXTURE_SPECS:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(list_fixtures())}")
    text = resources.files(__name__).joinpath(f"{name}.json").read_text()
    return instance_from_dict(json.loads(text))


def regenerate(directory: Union[str, Path]) -> List[Path]:
    """Write every fixture from its spec into ``directory``."""
    from ..pipeline.synthetic import SyntheticSpec, generate_synthetic

    out = Path(directory)
    return [save_instance(generate_synthetic(SyntheticSpec(**spec)), out / f"{name}.json")
            for name, spec in FIXTURE_SPECS.items()]
