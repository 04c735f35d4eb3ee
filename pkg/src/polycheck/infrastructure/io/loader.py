from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple, Union

from polycheck.core.config.settings import RunConfig
from polycheck.domain.enums import NetFormat
from polycheck.domain.models import Marking, PetriNet

from .mcc import parse_mcc
from .pnml import parse_pnml
from .properties import NamedQuery, parse_properties
from .tina import parse_net


def guess_format(path: Path) -> NetFormat:
    return NetFormat.PNML if path.suffix.lower() in (".pnml", ".xml") else NetFormat.NET


def load_net(path: Union[str, Path], fmt: Optional[NetFormat] = None) -> Tuple[PetriNet, Marking]:
    path = Path(path)
    fmt = fmt or guess_format(path)
    text = path.read_text(encoding="utf-8")
    return parse_pnml(text) if fmt == NetFormat.PNML else parse_net(text)


def load_queries(config: RunConfig, net: PetriNet) -> List[NamedQuery]:
    """The queries of a run: inline text, a property file, or an MCC XML file."""
    if config.mcc_path is not None:
        return parse_mcc(config.mcc_path.read_text(encoding="utf-8"), net)
    if config.property_path is not None:
        return parse_properties(config.property_path.read_text(encoding="utf-8"), net)
    assert config.property_text is not None
    return parse_properties(config.property_text, net)
