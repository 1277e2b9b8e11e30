/** Virtualized horizontal strip arithmetic: only visible items mount. */

export interface StripWindow {
  /** first mounted position (inclusive) */
  first: number;
  /** last mounted position (inclusive) */
  last: number;
  /** pixel offset of the first mounted item */
  offsetPx: number;
  /** full scrollable width in pixels */
  totalPx: number;
}

/**
 * Compute which strip positions to mount for the current scroll state.
 * `overscan` extra items are mounted on each side to keep fast scrolling
 * seamless.
 */
export function stripWindow(
  scrollLeft: number,
  viewportWidth: number,
  itemWidth: number,
  total: number,
  overscan = 4,
): StripWindow {
  if (itemWidth <= 0 || viewportWidth < 0 || total < 0) {
    throw new RangeError("itemWidth must be > 0 and sizes non-negative");
  }
  if (total === 0) {
    return { first: 0, last: -1, offsetPx: 0, totalPx: 0 };
  }
  const clampedScroll = Math.max(0, Math.min(scrollLeft, total * itemWidth));
  const first = Math.max(0, Math.floor(clampedScroll / itemWidth) - overscan);
  const last = Math.min(
    total - 1,
    Math.ceil((clampedScroll + viewportWidth) / itemWidth) - 1 + overscan,
  );
  return {
    first,
    last,
    offsetPx: first * itemWidth,
    totalPx: total * itemWidth,
  };
}
