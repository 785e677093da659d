//! Held-out evaluation seeds: 100 fixed values per environment, all in
//! `[1_000_000, 2_000_000)` and so disjoint from training seeds.

use crate::gridworld::EnvKind;

const SIMPLE_DOOR_KEY: [u64; 100] = [
    1011174, 1018282, 1028597, 1050551, 1060650, 1085890, 1096277, 1110984,
    1118863, 1125730, 1129655, 1133581, 1141317, 1145009, 1149522, 1175255,
    1191760, 1193092, 1196175, 1245689, 1247923, 1272206, 1277179, 1280896,
    1298549, 1307965, 1330084, 1336258, 1347691, 1362420, 1392890, 1399487,
    1422701, 1427341, 1437576, 1439696, 1441441, 1456761, 1475257, 1476894,
    1481393, 1490813, 1495812, 1517909, 1518398, 1520392, 1528686, 1534979,
    1541384, 1542953, 1548718, 1554309, 1561757, 1565486, 1565766, 1583398,
    1626515, 1643428, 1661748, 1664699, 1670314, 1672813, 1682505, 1691554,
    1713142, 1721001, 1721712, 1722871, 1725968, 1730396, 1732726, 1743420,
    1769786, 1770124, 1792171, 1796566, 1807737, 1808188, 1811132, 1815200,
    1824439, 1847819, 1851729, 1855543, 1870121, 1878606, 1880050, 1886390,
    1909996, 1910021, 1923488, 1936390, 1937258, 1960086, 1963942, 1984349,
    1988871, 1988915, 1998341, 1999233,
];

const KEY_IN_BOX: [u64; 100] = [
    1005286, 1007827, 1020536, 1021526, 1040879, 1045369, 1049684, 1060549,
    1088377, 1089921, 1094502, 1094839, 1098801, 1099346, 1102571, 1106470,
    1123697, 1126348, 1127742, 1131418, 1152458, 1157102, 1170735, 1186990,
    1204304, 1206190, 1211041, 1217448, 1225210, 1225924, 1226904, 1230959,
    1252094, 1266265, 1298319, 1300261, 1304677, 1332270, 1338963, 1349339,
    1355994, 1357267, 1362503, 1363115, 1373392, 1373426, 1383616, 1396912,
    1408227, 1410492, 1412937, 1420873, 1430344, 1430581, 1474129, 1513078,
    1527915, 1545630, 1568763, 1569077, 1589441, 1589690, 1590780, 1605404,
    1609406, 1615364, 1615643, 1621103, 1621413, 1625222, 1631352, 1639208,
    1653007, 1674394, 1706061, 1709319, 1744511, 1745492, 1746458, 1748991,
    1750162, 1805449, 1813336, 1853219, 1854234, 1857670, 1860980, 1867768,
    1881059, 1896763, 1901399, 1906206, 1917934, 1921946, 1926813, 1956906,
    1964351, 1976368, 1992286, 1993069,
];

const RANDOM_BOX_KEY: [u64; 100] = [
    1030917, 1035559, 1041728, 1074214, 1075639, 1079207, 1083028, 1112505,
    1114455, 1131228, 1132512, 1134756, 1141240, 1148475, 1189331, 1195587,
    1200289, 1204884, 1220295, 1222845, 1224429, 1229698, 1238347, 1262546,
    1269031, 1269036, 1287401, 1295260, 1299808, 1308839, 1308943, 1309251,
    1320340, 1332098, 1345825, 1351970, 1353745, 1363927, 1372849, 1375618,
    1389896, 1401509, 1425854, 1426850, 1432961, 1434094, 1468823, 1481711,
    1495538, 1530691, 1537324, 1549645, 1561138, 1564273, 1567488, 1584768,
    1590579, 1591251, 1598103, 1625508, 1632511, 1641271, 1650859, 1657410,
    1663023, 1663808, 1684654, 1696051, 1697791, 1702464, 1705187, 1722800,
    1734343, 1741936, 1742520, 1758201, 1770026, 1772934, 1773930, 1775310,
    1780272, 1783944, 1792448, 1800073, 1803564, 1812888, 1821633, 1836025,
    1837211, 1841043, 1865135, 1884419, 1890987, 1929609, 1937404, 1946979,
    1964929, 1968593, 1973139, 1986843,
];

const COLORED_DOOR_KEY: [u64; 100] = [
    1001574, 1005387, 1007597, 1014840, 1057417, 1077461, 1083387, 1085234,
    1086693, 1100772, 1128501, 1130766, 1139160, 1155359, 1176223, 1177940,
    1198382, 1202057, 1216447, 1218999, 1222672, 1231081, 1231090, 1234016,
    1243324, 1244313, 1272822, 1277947, 1286102, 1296797, 1297627, 1304815,
    1348960, 1350874, 1351181, 1352026, 1370483, 1370764, 1375760, 1382809,
    1385705, 1412292, 1417829, 1418682, 1448990, 1515110, 1516967, 1518207,
    1547476, 1550671, 1553378, 1563461, 1563891, 1578738, 1590920, 1591583,
    1591760, 1605099, 1610772, 1616982, 1623305, 1626742, 1643906, 1652011,
    1657898, 1674528, 1688960, 1724870, 1733355, 1738134, 1739988, 1749099,
    1750124, 1754642, 1755618, 1769741, 1779348, 1779814, 1801491, 1817278,
    1817774, 1833224, 1835515, 1838925, 1840325, 1859460, 1864296, 1868041,
    1873214, 1888267, 1897665, 1898682, 1900724, 1912037, 1913507, 1924190,
    1946887, 1957452, 1973097, 1995524,
];

const MOVING_OBSTACLE: [u64; 100] = [
    1039426, 1040557, 1042581, 1049596, 1051753, 1070682, 1080841, 1083289,
    1084148, 1089097, 1095731, 1099205, 1101342, 1132373, 1140475, 1147313,
    1152245, 1171411, 1186582, 1196616, 1207225, 1210096, 1211536, 1221589,
    1234902, 1249086, 1268680, 1274870, 1275894, 1295746, 1310464, 1318265,
    1331209, 1345795, 1362937, 1376120, 1379354, 1398325, 1401481, 1404583,
    1411691, 1422071, 1423518, 1453894, 1459877, 1463510, 1470879, 1509900,
    1516674, 1549149, 1567163, 1572491, 1582621, 1589124, 1594421, 1596100,
    1601436, 1604819, 1608292, 1612406, 1617417, 1621776, 1624861, 1653292,
    1653322, 1662622, 1664157, 1677600, 1685218, 1701552, 1715192, 1722245,
    1727600, 1727860, 1729144, 1745024, 1756734, 1759995, 1761614, 1777613,
    1788010, 1791957, 1810153, 1820799, 1841471, 1847108, 1856936, 1859004,
    1876249, 1912642, 1924452, 1934464, 1935718, 1940190, 1947108, 1947639,
    1964096, 1972445, 1983129, 1983967,
];

pub fn test_seeds(kind: EnvKind) -> &'static [u64] {
    match kind {
        EnvKind::SimpleDoorKey => &SIMPLE_DOOR_KEY,
        EnvKind::KeyInBox => &KEY_IN_BOX,
        EnvKind::RandomBoxKey => &RANDOM_BOX_KEY,
        EnvKind::ColoredDoorKey => &COLORED_DOOR_KEY,
        EnvKind::MovingObstacle => &MOVING_OBSTACLE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::TRAIN_SEED_LIMIT;

    #[test]
    fn hundred_distinct_held_out_seeds_per_env() {
        for k in EnvKind::ALL {
            let s = test_seeds(k);
            let set: std::collections::BTreeSet<_> = s.iter().collect();
            assert_eq!(set.len(), 100);
            assert!(s.iter().all(|x| (TRAIN_SEED_LIMIT..2 * TRAIN_SEED_LIMIT).contains(x)));
        }
    }
}
