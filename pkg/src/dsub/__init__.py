"""Subtyping for D<: and F<:: declarative rule systems, algorithmic deciders and reductions."""

from .judgements import Derivation, SearchResult, SubJudgement, SystemId, TypingJudgement, Verdict
from .syntax import (
    BOT, EMPTY, FTOP, TOP, All, Apply, Bot, Context, FForall, FFun, FTop, FTVar, Lambda, Let,
    Path, Top, TypeDecl, TypeTag, Var,
)

__version__ = "0.1.0"
