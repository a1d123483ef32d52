// Profile card: verified mark, badge list, signed reputation sum, and one
// colored chip per grade level.

import type { Profile } from "../api/types.js";

export type GradeColor = "red" | "gray" | "green";

// Five levels: two negative (red), one neutral (gray), two positive (green).
// Must match the server's grade_color mapping; the server also ships the
// mapping in profile responses and we prefer it when present.
export const GRADE_COLORS: Record<number, GradeColor> = {
  1: "red",
  2: "red",
  3: "gray",
  4: "green",
  5: "green",
};

export interface GradeChip {
  grade: number;
  count: number;
  color: GradeColor;
}

export interface ProfileCardModel {
  userId: string;
  displayName: string;
  verified: boolean;
  badges: { orgName: string; date: string; note: string | null }[];
  reputationSum: number;
  sumLabel: string;
  chips: GradeChip[];
}

export function formatSum(total: number): string {
  return total > 0 ? `+${total}` : `${total}`;
}

export function toProfileCard(profile: Profile): ProfileCardModel {
  const chips: GradeChip[] = [1, 2, 3, 4, 5].map((grade) => ({
    grade,
    count: profile.grade_counts[String(grade)] ?? 0,
    color: (profile.grade_colors?.[String(grade)] as GradeColor) ?? GRADE_COLORS[grade]!,
  }));
  return {
    userId: profile.user_id,
    displayName: profile.display_name,
    verified: profile.badges.length > 0,
    badges: profile.badges.map((badge) => ({
      orgName: badge.org_name,
      date: badge.confirmed_at.slice(0, 10),
      note: badge.note,
    })),
    reputationSum: profile.reputation_sum,
    sumLabel: formatSum(profile.reputation_sum),
    chips,
  };
}
