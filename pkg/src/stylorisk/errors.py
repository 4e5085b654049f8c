"""Exception hierarchy shared across the toolkit."""


class StyloError(Exception):
    """Base class for all toolkit errors."""


class EmptyTextError(StyloError):
    """Text contains no word tokens."""


class EmptyListError(StyloError):
    """An operation that requires at least one element got none."""


class ParseError(StyloError):
    """A structured response did not match the documented schema."""


class MetadataParseError(ParseError):
    """Metadata extraction reply failed to parse, retry included."""


class DimMismatchError(StyloError):
    """Embeddings of different dimensions were compared."""


class ProviderError(StyloError):
    """Base class for external-provider failures."""


class AuthError(ProviderError):
    """The provider rejected the configured credential."""


class RateLimitedError(ProviderError):
    """The provider kept rate-limiting after all retry attempts."""


class MalformedResponseError(ProviderError):
    """The provider answered with an unexpected payload shape."""


class NoFixtureError(ProviderError):
    """Strict stub search got a query with no matching fixture key."""


class StoreError(StyloError):
    """Base class for profile-store failures."""


class StoreLockedError(StoreError):
    """Another writer holds the store lock."""


class MissingAuthorError(StoreError):
    """An article without a byline was offered for ingestion."""


class NotFoundError(StoreError):
    """Lookup of an unknown author or article."""


class EmptyStoreError(StoreError):
    """Candidate search against a store with no authors."""


class EmptyCandidatesError(StyloError):
    """The search stage produced no candidates at all."""


class UtilityBelowFloorError(StyloError):
    """Rewritten text drifted too far from the original meaning."""

    def __init__(self, utility_score, floor, outcome=None):
        super().__init__(
            f"utility score {utility_score:.4f} below floor {floor:.4f}"
        )
        self.utility_score = utility_score
        self.floor = floor
        self.outcome = outcome


class HeaderMismatchError(StyloError):
    """Dataset file header lacks required columns."""


class UnknownTargetError(StyloError):
    """A targeted scenario names an author absent from the store."""
