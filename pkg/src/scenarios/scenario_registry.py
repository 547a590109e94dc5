"""Scenario registry - central catalog of the bundled scenarios"""

from pathlib import Path
from typing import Any, Dict, Optional, Union

SCENARIO_DIR = Path(__file__).parent.parent.parent / "scenarios"


class ScenarioRegistry:
    """Registry of the bundled walkthrough scenarios"""

    SCENARIOS = {
        "allphotos": {
            "file": "allphotos.wdm",
            "description": "Union of Bob's and Sue's photos with provenance-based reads",
            "rounds": 2,
        },
        "multiderivation": {
            "file": "multiderivation.wdm",
            "description": "One fact, two derivations; either one suffices to read it",
            "rounds": 1,
        },
        "hide": {
            "file": "hide.wdm",
            "description": "Friends list hidden from the provenance of published photos",
            "rounds": 2,
        },
        "hide_off": {
            "file": "hide_off.wdm",
            "description": "Published photos without the hide annotation",
            "rounds": 2,
        },
        "hatemail": {
            "file": "hatemail.wdm",
            "description": "Delegated rules sandboxed with the delegator's privileges",
            "rounds": 3,
        },
        "secret": {
            "file": "secret.wdm",
            "description": "Delegated copy of a secret once read access is granted",
            "rounds": 3,
        },
        "persistence": {
            "file": "persistence.wdm",
            "description": "Facts only outlive a round through a persistence rule",
            "rounds": 10,
        },
        "fontainbleau": {
            "file": "fontainbleau.wdm",
            "description": "Multi-hop delegation with relation and peer variables",
            "rounds": 5,
        },
        "empty": {
            "file": "empty.wdm",
            "description": "No peers, no rules",
            "rounds": 1,
        },
    }

    @classmethod
    def get_all_scenarios(cls) -> Dict[str, Any]:
        """Get all registered scenarios"""
        return {name: dict(entry) for name, entry in cls.SCENARIOS.items()}

    @classmethod
    def get_scenario(cls, name: str) -> Optional[Dict[str, Any]]:
        """Get a specific scenario by name"""
        entry = cls.SCENARIOS.get(name)
        return dict(entry) if entry is not None else None

    @classmethod
    def path_of(cls, name: str) -> Path:
        entry = cls.SCENARIOS.get(name)
        if entry is None:
            raise KeyError(f"no bundled scenario named {name!r}")
        return SCENARIO_DIR / entry["file"]

    @classmethod
    def resolve(cls, name_or_path: Union[str, Path]) -> Path:
        """A registry name or a file path; existing files win over names"""
        path = Path(name_or_path)
        if path.exists() or str(name_or_path) not in cls.SCENARIOS:
            return path
        return cls.path_of(str(name_or_path))
