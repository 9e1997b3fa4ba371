"""Daily dosage extraction from free-text medication instructions (Sigs)."""

__version__ = "0.1.0"

from .dosage import DailyDosage, DosageOutcome, IngredientDose, ReasonCode, calculate_daily_dosage
from .extraction import ExtractionResult, extract, extract_external
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .medorder import MedicationOrder, Strength, parse_strength


def daily_dosage(sig: str, strength: str = "", route: str = "", form: str = "",
                 lexicon: Lexicon | None = None) -> DosageOutcome:
    """Convenience wrapper: rule-based extraction plus dosage calculation."""
    lexicon = lexicon or default_lexicon()
    order = MedicationOrder(sig, strength, route, form)
    return calculate_daily_dosage(order, extract(sig, lexicon), lexicon)


__all__ = [
    "DailyDosage",
    "DosageOutcome",
    "ExtractionResult",
    "IngredientDose",
    "Lexicon",
    "MedicationOrder",
    "ReasonCode",
    "Strength",
    "calculate_daily_dosage",
    "daily_dosage",
    "default_lexicon",
    "extract",
    "extract_external",
    "load_lexicon",
    "parse_strength",
]
